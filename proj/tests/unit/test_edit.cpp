#include <cmath>
#include <limits>

#include "attnedit/edit.hpp"
#include "attnedit/error.hpp"
#include "attnedit/random.hpp"
#include "doctest.h"

using namespace attnedit;

namespace {

EditDirection unit_direction(std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  EditDirection dir;
  dir.vector = random_unit_vector(d, rng);
  return dir;
}

LatentTokens tokens_at(std::uint32_t t, std::size_t n, std::size_t d, std::uint64_t seed) {
  Rng rng(seed);
  return {gaussian_matrix(n, d, rng), t};
}

InjectionSchedule schedule(double alpha) {
  InjectionSchedule s;
  s.alpha = alpha;
  return s;
}

}  // namespace

TEST_SUITE("edit") {

TEST_CASE("window boundaries") {
  const auto dir = unit_direction(8, 1);
  const auto sched = schedule(0.2);
  CHECK_FALSE(apply_edit(tokens_at(600, 4, 8, 2), dir, sched).z == tokens_at(600, 4, 8, 2).z);
  for (std::uint32_t t : {0u, 100u, 500u, 800u, 999u, 1000u}) {
    CAPTURE(t);
    const LatentTokens z = tokens_at(t, 4, 8, 2);
    CHECK(apply_edit(z, dir, sched).z == z.z);
  }
  CHECK(sched.active(501));
  CHECK(sched.active(799));
  CHECK_FALSE(sched.active(500));
  CHECK_FALSE(sched.active(800));

  InjectionSchedule small = sched;
  small.total_steps = 10;
  CHECK(small.active(6));
  CHECK_FALSE(small.active(5));
  CHECK_FALSE(small.active(8));
}

TEST_CASE("zero strength is a bitwise copy") {
  const LatentTokens z = tokens_at(600, 5, 6, 3);
  const LatentTokens out = apply_edit(z, unit_direction(6, 4), schedule(0.0));
  CHECK(out.z == z.z);
  CHECK(out.timestep == z.timestep);
}

TEST_CASE("edit norm is |alpha| sqrt(N)") {
  for (double alpha : {0.4, -0.25, 1e-3, 3.0}) {
    const std::size_t n = 32;
    const LatentTokens z = tokens_at(650, n, 16, 5);
    const LatentTokens out = apply_edit(z, unit_direction(16, 6), schedule(alpha));
    const double expected = std::abs(alpha) * std::sqrt(static_cast<double>(n));
    CHECK(std::abs(frobenius_norm(out.z - z.z) - expected) <= 1e-12 * expected);
  }
}

TEST_CASE("sweep alphas") {
  SweepSpec three{-0.4, 0.4, 3};
  CHECK(three.alphas() == std::vector<double>{-0.4, 0.0, 0.4});
  const auto five = SweepSpec{}.alphas();
  REQUIRE(five.size() == 5);
  CHECK(five.front() == -0.4);
  CHECK(five.back() == 0.4);
  CHECK(five[2] == 0.0);
  CHECK(five[1] == -five[3]);
  CHECK_THROWS_AS(SweepSpec({0.4, -0.4, 3}).alphas(), Error);
  CHECK_THROWS_AS(SweepSpec({-0.4, 0.4, 1}).alphas(), Error);
}

TEST_CASE("sweep midpoint affinity") {
  SUBCASE("exact on dyadic data") {
    // Entries, direction and alphas are all short dyadic fractions, so every
    // sum below is exact.
    EditDirection dir;
    dir.vector = {0.5, 0.5, 0.5, 0.5};
    Matrix z(3, 4);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 4; ++j) z(i, j) = 0.25 * static_cast<double>(i * 4 + j) - 1.0;
    const auto pts = sweep_edits({z, 700}, dir, schedule(0.0), SweepSpec{-0.5, 0.5, 5});
    REQUIRE(pts.size() == 5);
    for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
      const Matrix mid = 0.5 * (pts[k - 1].tokens.z + pts[k + 1].tokens.z);
      CHECK(pts[k].tokens.z == mid);
    }
  }
  SUBCASE("rounding-level on general data") {
    const auto dir = unit_direction(16, 7);
    const LatentTokens z = tokens_at(700, 32, 16, 8);
    const auto pts = sweep_edits(z, dir, schedule(0.0), SweepSpec{});
    const Matrix mid = 0.5 * (pts[2].tokens.z + pts[4].tokens.z);
    double scale = 0.0;
    for (double x : pts[3].tokens.z.data()) scale = std::max(scale, std::abs(x));
    CHECK(max_abs_diff(pts[3].tokens.z, mid) <= 4 * std::numeric_limits<double>::epsilon() * scale);
    CHECK(pts[2].tokens.z == z.z);
  }
}

TEST_CASE("sweep points are independent of order") {
  const auto dir = unit_direction(6, 9);
  const LatentTokens z = tokens_at(700, 4, 6, 10);
  const auto pts = sweep_edits(z, dir, schedule(0.0), SweepSpec{-0.4, 0.4, 5});
  for (const auto& p : pts) CHECK(p.tokens.z == apply_edit(z, dir, schedule(p.alpha)).z);
}

TEST_CASE("rejections") {
  const auto dir = unit_direction(4, 11);
  CHECK_THROWS_AS(apply_edit({Matrix(2, 4), std::nullopt}, dir, schedule(0.1)), Error);
  CHECK_THROWS_AS(apply_edit({Matrix(2, 5), 600}, dir, schedule(0.1)), Error);
  InjectionSchedule bad = schedule(0.1);
  bad.t_low_frac = 0.9;
  CHECK_THROWS_AS(apply_edit({Matrix(2, 4), 600}, dir, bad), Error);
  bad = schedule(std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(bad.validate(), Error);
  bad = schedule(0.1);
  bad.total_steps = 0;
  CHECK_THROWS_AS(bad.validate(), Error);
}

}  // TEST_SUITE
