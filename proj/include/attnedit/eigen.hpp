#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attnedit/matrix.hpp"

namespace attnedit {

struct EigenPair {
  double value;
  Vector vector;  // unit norm
};

enum class EigenMethod {
  Auto,         // Jacobi up to kJacobiMaxDim, tridiagonal QL above
  Jacobi,       // cyclic Jacobi rotations
  Tridiagonal,  // Householder reduction followed by implicit-shift QL
};

/// Largest dimension for which EigenMethod::Auto picks Jacobi.
inline constexpr std::size_t kJacobiMaxDim = 128;

/// Relative asymmetry accepted by eig_symmetric: max|c - c^T| <= tol * ||c||_F.
inline constexpr double kSymmetryTolerance = 1e-9;

/// Full eigen-decomposition of a symmetric matrix.
///
/// The input is symmetrized as (c + c^T)/2 after the asymmetry check. Pairs are
/// sorted by value, largest first, and every vector is sign-canonicalized so
/// that its entry of largest magnitude (first one on ties) is positive.
std::vector<EigenPair> eig_symmetric(const Matrix& c, EigenMethod method = EigenMethod::Auto);

/// n^T c n / n^T n.
double rayleigh_quotient(const Matrix& c, std::span<const double> n);

/// Flip v in place so its largest-magnitude entry is positive.
void canonicalize_sign(std::span<double> v);

}  // namespace attnedit
