#pragma once

#include <cstddef>
#include <span>

#include "attnedit/attention.hpp"
#include "attnedit/matrix.hpp"

namespace attnedit {

/// How far a latent set is from the identity-covariance premise.
///
/// Second moments use the per-token estimator (1/(M·N)) Σ z zᵀ without mean
/// subtraction. Deviations are ‖Ĉ − I‖_F / ‖I‖_F.
struct WhiteningReport {
  std::size_t n_samples = 0;
  double dev_zz = 0.0;  // token rows of Z
  double dev_vv = 0.0;  // token rows of V = Z W_V
  /// E[SᵀS] rescaled to trace N before comparison with the N x N identity;
  /// a row-stochastic S cannot satisfy E[SᵀS] = I literally.
  double dev_ss = 0.0;
  /// |E tr((dS V)ᵀ(S dV))| / (E‖dS V‖² + E‖S dV‖²), in [0, 1/2]; 0 when both
  /// terms vanish.
  double cross_term_ratio = 0.0;
};

/// Empirical second moment (1/(M·N)) Σ_samples Σ_rows r rᵀ of the given
/// row sets, each a matrix with the same column count.
Matrix second_moment(std::span<const Matrix> row_sets);

/// ‖c − I‖_F / ‖I‖_F.
double identity_deviation(const Matrix& c);

/// Requires at least two samples of consistent shape.
WhiteningReport whitening_report(std::span<const LatentTokens> z_samples,
                                 const AttentionWeights& w,
                                 const PerturbationDirection& direction, double alpha);

}  // namespace attnedit
