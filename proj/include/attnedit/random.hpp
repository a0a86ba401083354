#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "attnedit/matrix.hpp"

namespace attnedit {

using Rng = std::mt19937_64;

/// Independent stream seed for item `index` of a run seeded with `seed`
/// (splitmix64 finalizer over both words). Reproducible regardless of the
/// order in which items are generated.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Entries i.i.d. N(0, stddev^2).
Matrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng, double stddev = 1.0);

/// Uniform on the unit sphere in R^d.
Vector random_unit_vector(std::size_t d, Rng& rng);

/// Haar-ish random orthogonal matrix via Gram-Schmidt on a Gaussian matrix.
Matrix random_orthogonal(std::size_t d, Rng& rng);

}  // namespace attnedit
