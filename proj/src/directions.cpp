#include "attnedit/directions.hpp"

#include <algorithm>
#include <cmath>

#include "attnedit/error.hpp"
#include "attnedit/random.hpp"
#include "attnedit/stats.hpp"

namespace attnedit {

std::string_view to_string(CombinedVariant v) {
  return v == CombinedVariant::FinalExpr ? "final" : "eqc";
}

CombinedVariant parse_variant(std::string_view s) {
  if (s == "final") return CombinedVariant::FinalExpr;
  if (s == "eqc") return CombinedVariant::EqC;
  throw Error(ErrorKind::Usage, "unknown variant '" + std::string(s) + "', expected final|eqc");
}

Matrix combined_matrix(const AttentionWeights& w, CombinedVariant variant) {
  Matrix c = gram_of_columns(w.w_q);
  c += gram_of_columns(w.w_k);
  c += variant == CombinedVariant::FinalExpr ? gram_of_rows(w.w_v) : gram_of_columns(w.w_v);
  // Each Gram is exactly symmetric already; this only guards future changes.
  return symmetrized(c);
}

std::vector<bool> degenerate_flags(std::span<const double> values) {
  std::vector<bool> flags(values.size(), false);
  if (values.empty()) return flags;
  const double threshold = kDegeneracyGap * std::abs(values.front());
  for (std::size_t i = 0; i + 1 < values.size(); ++i) {
    if (values[i] - values[i + 1] <= threshold) {
      flags[i] = true;
      flags[i + 1] = true;
    }
  }
  return flags;
}

std::vector<EditDirection> extract_directions(const AttentionWeights& w, std::size_t top_k,
                                              CombinedVariant variant, std::string layer_id,
                                              EigenMethod method) {
  if (top_k == 0 || top_k > w.d()) {
    throw Error(ErrorKind::Domain, "top_k must be in [1, " + std::to_string(w.d()) + "], got " +
                                       std::to_string(top_k));
  }
  auto pairs = eig_symmetric(combined_matrix(w, variant), method);
  std::vector<double> values;
  values.reserve(pairs.size());
  for (const auto& p : pairs) values.push_back(p.value);
  const auto flags = degenerate_flags(values);

  std::vector<EditDirection> out;
  out.reserve(top_k);
  for (std::size_t r = 0; r < top_k; ++r) {
    out.push_back({layer_id, r, pairs[r].value, std::move(pairs[r].vector), variant, flags[r]});
  }
  return out;
}

double predicted_sensitivity(const Matrix& c, std::span<const double> n, double alpha) {
  const double len = norm2(n);
  if (std::abs(len - 1.0) > 1e-9) {
    throw Error(ErrorKind::Domain,
                "predicted_sensitivity: direction is not unit norm (" + std::to_string(len) + ")");
  }
  return alpha * alpha * rayleigh_quotient(c, n);
}

namespace {

VariantScore score_variant(CombinedVariant v, std::span<const double> predicted,
                           std::span<const double> empirical) {
  VariantScore s;
  s.variant = v;
  s.spearman = spearman_correlation(predicted, empirical);
  s.pearson = pearson_correlation(predicted, empirical);
  double err = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < empirical.size(); ++i) {
    if (empirical[i] == 0.0) continue;
    err += std::abs(predicted[i] - empirical[i]) / empirical[i];
    ++counted;
  }
  s.mean_relative_error = counted == 0 ? 0.0 : err / static_cast<double>(counted);
  return s;
}

}  // namespace

AuditReport variant_audit(const AttentionWeights& w, const AuditConfig& config) {
  if (config.m_samples < 32) {
    throw Error(ErrorKind::Domain, "variant_audit needs at least 32 samples, got " +
                                       std::to_string(config.m_samples));
  }
  if (config.n_directions < 2) {
    throw Error(ErrorKind::Domain, "variant_audit needs at least 2 directions");
  }
  const std::size_t d = w.d();
  const auto latents =
      whitened_gaussian_samples(config.m_samples, config.n_tokens, d, derive_seed(config.seed, 1));
  const auto prepared = prepare_samples(latents, w);
  const Matrix c_final = combined_matrix(w, CombinedVariant::FinalExpr);
  const Matrix c_eqc = combined_matrix(w, CombinedVariant::EqC);

  AuditReport report;
  report.config = config;
  Rng rng(derive_seed(config.seed, 2));
  for (std::size_t i = 0; i < config.n_directions; ++i) {
    const auto n = PerturbationDirection::normalized(random_unit_vector(d, rng));
    report.empirical.push_back(
        empirical_sensitivity(prepared, w, n, config.alpha, SensitivityTerms::ExactOnly)
            .mean_exact);
    report.predicted_final.push_back(predicted_sensitivity(c_final, n.values(), config.alpha));
    report.predicted_eqc.push_back(predicted_sensitivity(c_eqc, n.values(), config.alpha));
  }
  report.final_expr =
      score_variant(CombinedVariant::FinalExpr, report.predicted_final, report.empirical);
  report.eqc = score_variant(CombinedVariant::EqC, report.predicted_eqc, report.empirical);
  report.better = report.eqc.spearman > report.final_expr.spearman ? CombinedVariant::EqC
                                                                    : CombinedVariant::FinalExpr;
  return report;
}

DominanceReport principal_dominance(const AttentionWeights& w, CombinedVariant variant,
                                    std::span<const PreparedSample> samples, double alpha,
                                    std::size_t n_random, std::uint64_t seed) {
  if (n_random == 0) throw Error(ErrorKind::Domain, "principal_dominance: n_random is zero");
  const auto top = extract_directions(w, 1, variant);
  const PerturbationDirection principal(top.front().vector);

  DominanceReport report;
  report.principal_empirical =
      empirical_sensitivity(samples, w, principal, alpha, SensitivityTerms::ExactOnly).mean_exact;
  Rng rng(derive_seed(seed, 3));
  for (std::size_t i = 0; i < n_random; ++i) {
    const auto n = PerturbationDirection::normalized(random_unit_vector(w.d(), rng));
    report.random_empirical.push_back(
        empirical_sensitivity(samples, w, n, alpha, SensitivityTerms::ExactOnly).mean_exact);
  }
  report.percentile = percentile_of(report.principal_empirical, report.random_empirical);
  return report;
}

}  // namespace attnedit
