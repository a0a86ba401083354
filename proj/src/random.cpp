#include "attnedit/random.hpp"

namespace attnedit {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = normal(rng);
  return m;
}

Vector random_unit_vector(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  double len = 0.0;
  while (len == 0.0) {
    for (double& x : v) x = normal(rng);
    len = norm2(v);
  }
  for (double& x : v) x /= len;
  return v;
}

Matrix random_orthogonal(std::size_t d, Rng& rng) {
  Matrix q = gaussian_matrix(d, d, rng);
  // Modified Gram-Schmidt on rows, twice for orthogonality to rounding.
  for (int pass = 0; pass < 2; ++pass) {
    for (std::size_t i = 0; i < d; ++i) {
      auto qi = q.row(i);
      for (std::size_t j = 0; j < i; ++j) {
        const auto qj = q.row(j);
        const double proj = dot(qi, qj);
        for (std::size_t k = 0; k < d; ++k) qi[k] -= proj * qj[k];
      }
      const double len = norm2(qi);
      for (double& x : qi) x /= len;
    }
  }
  return q;
}

}  // namespace attnedit
