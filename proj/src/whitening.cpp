#include "attnedit/whitening.hpp"

#include <cmath>
#include <vector>

#include "attnedit/error.hpp"

namespace attnedit {

Matrix second_moment(std::span<const Matrix> row_sets) {
  if (row_sets.empty()) throw Error(ErrorKind::Domain, "second_moment: no rows");
  const std::size_t d = row_sets.front().cols();
  Matrix acc(d, d);
  std::size_t count = 0;
  for (const Matrix& m : row_sets) {
    if (m.cols() != d) {
      throw Error(ErrorKind::Dimension, "second_moment: inconsistent widths " +
                                            std::to_string(d) + " and " + m.shape());
    }
    acc += gram_of_columns(m);
    count += m.rows();
  }
  return (1.0 / static_cast<double>(count)) * acc;
}

double identity_deviation(const Matrix& c) {
  if (!c.is_square()) throw Error(ErrorKind::Dimension, "identity_deviation: " + c.shape());
  const Matrix diff = c - Matrix::identity(c.rows());
  return frobenius_norm(diff) / std::sqrt(static_cast<double>(c.rows()));
}

WhiteningReport whitening_report(std::span<const LatentTokens> z_samples,
                                 const AttentionWeights& w,
                                 const PerturbationDirection& direction, double alpha) {
  if (z_samples.size() < 2) {
    throw Error(ErrorKind::Domain, "whitening_report needs at least 2 samples, got " +
                                       std::to_string(z_samples.size()));
  }
  const std::size_t n_tokens = z_samples.front().n_tokens();
  for (const LatentTokens& z : z_samples) {
    if (z.n_tokens() != n_tokens || z.d() != w.d()) {
      throw Error(ErrorKind::Dimension, "whitening_report: sample " + z.z.shape() +
                                            " inconsistent with " + std::to_string(n_tokens) +
                                            "x" + std::to_string(w.d()));
    }
  }

  std::vector<Matrix> zs, vs;
  Matrix ss(n_tokens, n_tokens);
  double term_qk = 0.0, term_v = 0.0, cross = 0.0;
  for (const LatentTokens& z : z_samples) {
    AttentionTrace trace = attention_trace(z, w);
    const FirstOrderTerms t = first_order_terms(trace, w, direction, alpha);
    term_qk += frobenius_norm_sq(t.ds_v);
    term_v += frobenius_norm_sq(t.s_dv);
    cross += frobenius_inner(t.ds_v, t.s_dv);
    ss += gram_of_columns(trace.scores);
    zs.push_back(z.z);
    vs.push_back(std::move(trace.v));
  }

  WhiteningReport r;
  r.n_samples = z_samples.size();
  r.dev_zz = identity_deviation(second_moment(zs));
  r.dev_vv = identity_deviation(second_moment(vs));

  double trace_ss = 0.0;
  for (std::size_t i = 0; i < n_tokens; ++i) trace_ss += ss(i, i);
  // trace(SᵀS) = ‖S‖_F² > 0 because every row of S sums to one.
  r.dev_ss = identity_deviation((static_cast<double>(n_tokens) / trace_ss) * ss);

  const double m = static_cast<double>(z_samples.size());
  const double denom = (term_qk + term_v) / m;
  r.cross_term_ratio = denom == 0.0 ? 0.0 : std::abs(cross / m) / denom;
  return r;
}

}  // namespace attnedit
