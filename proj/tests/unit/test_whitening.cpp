#include <cmath>

#include "attnedit/error.hpp"
#include "attnedit/random.hpp"
#include "attnedit/whitening.hpp"
#include "doctest.h"

using namespace attnedit;

namespace {

PerturbationDirection axis(std::size_t d) {
  Vector v(d, 0.0);
  v[0] = 1.0;
  return PerturbationDirection(v);
}

double dev_zz(const std::vector<LatentTokens>& samples) {
  std::vector<Matrix> rows;
  for (const auto& z : samples) rows.push_back(z.z);
  return identity_deviation(second_moment(rows));
}

}  // namespace

TEST_SUITE("whitening") {

TEST_CASE("basis rows") {
  // Each sample is I_d, so the per-token second moment is I/d and
  // ‖I/d − I‖_F / √d = 1 − 1/d.
  const std::size_t d = 8;
  const std::vector<LatentTokens> samples(5, LatentTokens{Matrix::identity(d), std::nullopt});
  const AttentionWeights w = random_attention_weights(d, 1);
  const WhiteningReport r = whitening_report(samples, w, axis(d), 1e-3);
  CHECK(r.n_samples == 5);
  CHECK(r.dev_zz == doctest::Approx(1.0 - 1.0 / d).epsilon(1e-15));
}

TEST_CASE("zero samples") {
  const std::vector<LatentTokens> samples(3, LatentTokens{Matrix(6, 4), std::nullopt});
  const WhiteningReport r = whitening_report(samples, random_attention_weights(4, 2), axis(4), 1e-3);
  CHECK(r.dev_zz == 1.0);
  CHECK(r.dev_vv == 1.0);
  // Uniform attention: E[SᵀS] = (1/N) 11ᵀ, rescaled to trace N it becomes 11ᵀ.
  CHECK(r.dev_ss == doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

TEST_CASE("Gaussian latents concentrate") {
  const auto samples = whitened_gaussian_samples(1024, 32, 16, 3);
  const WhiteningReport r = whitening_report(samples, random_attention_weights(16, 4), axis(16), 1e-3);
  CHECK(r.dev_zz <= 0.1);
}

TEST_CASE("concentration improves with 4x more samples in most seeds") {
  int improved = 0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const auto small = whitened_gaussian_samples(16, 8, 8, 100 + s);
    const auto large = whitened_gaussian_samples(64, 8, 8, 200 + s);
    improved += dev_zz(large) < dev_zz(small);
  }
  CHECK(improved > 5);
}

TEST_CASE("rotation invariance of dev_zz") {
  const std::size_t d = 12;
  Rng rng(5);
  const Matrix r = random_orthogonal(d, rng);
  const auto samples = whitened_gaussian_samples(20, 9, d, 6);
  std::vector<LatentTokens> rotated;
  for (const auto& z : samples) rotated.push_back({matmul(z.z, r), std::nullopt});
  const AttentionWeights w = random_attention_weights(d, 7);
  const double a = whitening_report(samples, w, axis(d), 1e-3).dev_zz;
  const double b = whitening_report(rotated, w, axis(d), 1e-3).dev_zz;
  CHECK(std::abs(a - b) <= 1e-9);
}

TEST_CASE("reports are deterministic") {
  const auto samples = whitened_gaussian_samples(16, 8, 8, 8);
  const AttentionWeights w = random_attention_weights(8, 9);
  const WhiteningReport a = whitening_report(samples, w, axis(8), 1e-3);
  const WhiteningReport b = whitening_report(samples, w, axis(8), 1e-3);
  CHECK(a.dev_zz == b.dev_zz);
  CHECK(a.dev_vv == b.dev_vv);
  CHECK(a.dev_ss == b.dev_ss);
  CHECK(a.cross_term_ratio == b.cross_term_ratio);
}

TEST_CASE("cross term is small on whitened inputs") {
  const AttentionWeights w = random_attention_weights(16, 7);
  const auto samples = whitened_gaussian_samples(256, 32, 16, 10);
  Rng rng(11);
  for (int i = 0; i < 3; ++i) {
    const auto n = PerturbationDirection::normalized(random_unit_vector(16, rng));
    const WhiteningReport r = whitening_report(samples, w, n, 1e-3);
    CHECK(r.cross_term_ratio >= 0.0);
    CHECK(r.cross_term_ratio < 0.25);
  }
}

TEST_CASE("rejections") {
  const AttentionWeights w = random_attention_weights(4, 12);
  const std::vector<LatentTokens> one(1, LatentTokens{Matrix(3, 4), std::nullopt});
  CHECK_THROWS_AS(whitening_report(one, w, axis(4), 1e-3), Error);
  std::vector<LatentTokens> mixed{{Matrix(3, 4), std::nullopt}, {Matrix(2, 4), std::nullopt}};
  CHECK_THROWS_AS(whitening_report(mixed, w, axis(4), 1e-3), Error);
  const std::vector<LatentTokens> wide(2, LatentTokens{Matrix(3, 5), std::nullopt});
  CHECK_THROWS_AS(whitening_report(wide, w, axis(4), 1e-3), Error);
  CHECK_THROWS_AS(identity_deviation(Matrix(2, 3)), Error);
}

}  // TEST_SUITE
