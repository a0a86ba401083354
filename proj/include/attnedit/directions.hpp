#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "attnedit/attention.hpp"
#include "attnedit/eigen.hpp"
#include "attnedit/matrix.hpp"

namespace attnedit {

/// Which Gram product of the value projection enters the combined matrix.
///   FinalExpr: C = Wq^T Wq + Wk^T Wk + Wv Wv^T
///   EqC:       C = Wq^T Wq + Wk^T Wk + Wv^T Wv
enum class CombinedVariant { FinalExpr, EqC };

/// "final" or "eqc".
std::string_view to_string(CombinedVariant v);
/// Inverse of to_string; throws Usage on anything else.
CombinedVariant parse_variant(std::string_view s);

inline constexpr std::size_t kDefaultTopK = 8;

/// Relative eigenvalue gap (against λ_max) below which neighbours are
/// reported as one basis-arbitrary cluster.
inline constexpr double kDegeneracyGap = 1e-8;

struct EditDirection {
  std::string layer_id;
  std::size_t rank = 0;  // 0 = principal
  double eigenvalue = 0.0;
  Vector vector;
  CombinedVariant variant = CombinedVariant::FinalExpr;
  bool degenerate_cluster = false;
};

/// Symmetric positive-semidefinite d x d matrix for the chosen variant.
Matrix combined_matrix(const AttentionWeights& w, CombinedVariant variant);

/// flags[i] is true when values[i] lies within kDegeneracyGap * |values[0]|
/// of a neighbour. `values` must be sorted descending.
std::vector<bool> degenerate_flags(std::span<const double> values);

/// Leading `top_k` eigenvectors of combined_matrix(w, variant), ranked by
/// eigenvalue, sign-canonicalized. Degeneracy is judged on the full spectrum.
std::vector<EditDirection> extract_directions(const AttentionWeights& w, std::size_t top_k,
                                              CombinedVariant variant,
                                              std::string layer_id = {},
                                              EigenMethod method = EigenMethod::Auto);

/// alpha² nᵀCn for unit n (within 1e-9).
double predicted_sensitivity(const Matrix& c, std::span<const double> n, double alpha);

struct AuditConfig {
  double alpha = 1e-3;
  std::size_t n_tokens = 32;
  std::size_t m_samples = 256;
  std::size_t n_directions = 200;
  std::uint64_t seed = 7;
};

struct VariantScore {
  CombinedVariant variant = CombinedVariant::FinalExpr;
  double spearman = 0.0;
  double pearson = 0.0;
  /// mean over directions of |predicted - empirical| / empirical
  double mean_relative_error = 0.0;
};

struct AuditReport {
  AuditConfig config;
  VariantScore final_expr;
  VariantScore eqc;
  /// Higher Spearman correlation; FinalExpr on a tie.
  CombinedVariant better = CombinedVariant::FinalExpr;
  std::vector<double> empirical;
  std::vector<double> predicted_final;
  std::vector<double> predicted_eqc;

  const VariantScore& score(CombinedVariant v) const {
    return v == CombinedVariant::FinalExpr ? final_expr : eqc;
  }
};

/// Compares both variants' predicted sensitivities against Monte-Carlo
/// empirical sensitivities over random unit directions and whitened Gaussian
/// latents. Requires m_samples >= 32.
AuditReport variant_audit(const AttentionWeights& w, const AuditConfig& config);

struct DominanceReport {
  double principal_empirical = 0.0;
  std::vector<double> random_empirical;
  /// Fraction of random directions whose sensitivity is <= the principal's.
  double percentile = 0.0;
};

/// Empirical sensitivity of the rank-0 direction against `n_random` random
/// unit directions, all evaluated on the same samples.
DominanceReport principal_dominance(const AttentionWeights& w, CombinedVariant variant,
                                    std::span<const PreparedSample> samples, double alpha,
                                    std::size_t n_random, std::uint64_t seed);

}  // namespace attnedit
