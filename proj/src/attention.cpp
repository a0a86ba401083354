#include "attnedit/attention.hpp"

#include <algorithm>
#include <cmath>

#include "attnedit/error.hpp"
#include "attnedit/random.hpp"

namespace attnedit {

namespace {

constexpr double kUnitTolerance = 1e-12;

void require_compatible(const LatentTokens& z, const AttentionWeights& w) {
  if (z.d() != w.d()) {
    throw Error(ErrorKind::Dimension, "latent tokens " + z.z.shape() +
                                          " do not match attention weights of dimension " +
                                          std::to_string(w.d()));
  }
}

void require_direction(const PerturbationDirection& n, std::size_t d) {
  if (n.d() != d) {
    throw Error(ErrorKind::Dimension, "direction of length " + std::to_string(n.d()) +
                                          " does not match dimension " + std::to_string(d));
  }
}

}  // namespace

AttentionWeights::AttentionWeights(Matrix q, Matrix k, Matrix v)
    : w_q(std::move(q)), w_k(std::move(k)), w_v(std::move(v)) {
  const std::size_t d = w_q.rows();
  for (const Matrix* m : {&w_q, &w_k, &w_v}) {
    if (m->rows() != d || m->cols() != d) {
      throw Error(ErrorKind::Dimension, "attention weights must all be " + std::to_string(d) +
                                            "x" + std::to_string(d) + ", got " + m->shape());
    }
    m->ensure_finite();
  }
}

PerturbationDirection::PerturbationDirection(Vector n) : n_(std::move(n)) {
  if (n_.empty()) throw Error(ErrorKind::Domain, "direction must be nonempty");
  const double len = norm2(n_);
  if (!std::isfinite(len) || std::abs(len - 1.0) > kUnitTolerance) {
    throw Error(ErrorKind::Domain,
                "direction must have unit norm, got " + std::to_string(len));
  }
}

PerturbationDirection PerturbationDirection::normalized(Vector n) {
  const double len = norm2(n);
  if (len == 0.0 || !std::isfinite(len)) {
    throw Error(ErrorKind::Domain, "cannot normalize a zero or non-finite direction");
  }
  for (double& x : n) x /= len;
  return PerturbationDirection(std::move(n));
}

Projections project_qkv(const LatentTokens& z, const AttentionWeights& w) {
  require_compatible(z, w);
  return {matmul(z.z, w.w_q), matmul(z.z, w.w_k), matmul(z.z, w.w_v)};
}

Matrix softmax_rows(const Matrix& l) {
  Matrix s(l.rows(), l.cols());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    const auto li = l.row(i);
    auto si = s.row(i);
    const double mx = *std::max_element(li.begin(), li.end());
    double sum = 0.0;
    for (std::size_t j = 0; j < li.size(); ++j) {
      si[j] = std::exp(li[j] - mx);
      sum += si[j];
    }
    for (double& x : si) x /= sum;
  }
  return s;
}

Matrix softmax_jacobian_apply(const Matrix& l, const Matrix& dl) {
  if (l.rows() != dl.rows() || l.cols() != dl.cols()) {
    throw Error(ErrorKind::Dimension,
                "softmax_jacobian_apply: shapes " + l.shape() + " and " + dl.shape());
  }
  const Matrix s = softmax_rows(l);
  Matrix out(l.rows(), l.cols());
  for (std::size_t i = 0; i < l.rows(); ++i) {
    const auto si = s.row(i);
    const auto di = dl.row(i);
    const double mean = dot(si, di);
    auto oi = out.row(i);
    for (std::size_t j = 0; j < si.size(); ++j) oi[j] = si[j] * (di[j] - mean);
  }
  return out;
}

AttentionTrace attention_trace(const LatentTokens& z, const AttentionWeights& w) {
  Projections p = project_qkv(z, w);
  Matrix logits = (1.0 / std::sqrt(static_cast<double>(w.d()))) * matmul_transpose_b(p.q, p.k);
  Matrix scores = softmax_rows(logits);
  Matrix output = matmul(scores, p.v);
  return {std::move(p.q), std::move(p.k),      std::move(p.v),
          std::move(logits), std::move(scores), std::move(output)};
}

Matrix attention_forward(const LatentTokens& z, const AttentionWeights& w) {
  return attention_trace(z, w).output;
}

LatentTokens perturbed(const LatentTokens& z, const PerturbationDirection& n, double alpha) {
  require_direction(n, z.d());
  LatentTokens out = z;
  const auto v = n.values();
  for (std::size_t i = 0; i < out.n_tokens(); ++i) {
    auto row = out.z.row(i);
    for (std::size_t j = 0; j < row.size(); ++j) row[j] += alpha * v[j];
  }
  return out;
}

Matrix delta_attn_exact(const LatentTokens& z, const AttentionWeights& w,
                        const PerturbationDirection& n, double alpha) {
  require_compatible(z, w);
  require_direction(n, w.d());
  return attention_forward(perturbed(z, n, alpha), w) - attention_forward(z, w);
}

FirstOrderTerms first_order_terms(const AttentionTrace& base, const AttentionWeights& w,
                                  const PerturbationDirection& n, double alpha) {
  require_direction(n, w.d());
  const std::size_t n_tokens = base.q.rows();
  const Matrix shift = alpha * broadcast_rows(n_tokens, n.values());
  const Matrix dq = matmul(shift, w.w_q);
  const Matrix dk = matmul(shift, w.w_k);
  const Matrix dv = matmul(shift, w.w_v);

  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(w.d()));
  const Matrix dl = inv_sqrt_d * (matmul_transpose_b(base.q, dk) + matmul_transpose_b(dq, base.k));
  const Matrix ds = softmax_jacobian_apply(base.logits, dl);
  return {matmul(ds, base.v), matmul(base.scores, dv)};
}

Matrix delta_attn_first_order(const LatentTokens& z, const AttentionWeights& w,
                              const PerturbationDirection& n, double alpha) {
  require_compatible(z, w);
  FirstOrderTerms t = first_order_terms(attention_trace(z, w), w, n, alpha);
  return t.ds_v + t.s_dv;
}

std::vector<PreparedSample> prepare_samples(std::span<const LatentTokens> samples,
                                            const AttentionWeights& w) {
  std::vector<PreparedSample> out;
  out.reserve(samples.size());
  for (const LatentTokens& z : samples) out.push_back({z, attention_trace(z, w)});
  return out;
}

SensitivityEstimate empirical_sensitivity(std::span<const LatentTokens> samples,
                                          const AttentionWeights& w,
                                          const PerturbationDirection& n, double alpha,
                                          SensitivityTerms terms) {
  if (samples.empty()) throw Error(ErrorKind::Domain, "empirical_sensitivity: no samples");
  const auto prepared = prepare_samples(samples, w);
  return empirical_sensitivity(std::span<const PreparedSample>(prepared), w, n, alpha, terms);
}

SensitivityEstimate empirical_sensitivity(std::span<const PreparedSample> samples,
                                          const AttentionWeights& w,
                                          const PerturbationDirection& n, double alpha,
                                          SensitivityTerms terms) {
  if (samples.empty()) throw Error(ErrorKind::Domain, "empirical_sensitivity: no samples");
  require_direction(n, w.d());

  SensitivityEstimate est;
  est.n_samples = samples.size();
  // Fixed sequential order keeps the sums bit-reproducible.
  for (const PreparedSample& s : samples) {
    require_compatible(s.tokens, w);
    const Matrix moved = attention_forward(perturbed(s.tokens, n, alpha), w);
    est.mean_exact += frobenius_norm_sq(moved - s.trace.output);
    if (terms == SensitivityTerms::ExactOnly) continue;
    const FirstOrderTerms t = first_order_terms(s.trace, w, n, alpha);
    est.term_qk += frobenius_norm_sq(t.ds_v);
    est.term_v += frobenius_norm_sq(t.s_dv);
    est.cross_term += frobenius_inner(t.ds_v, t.s_dv);
  }
  const double m = static_cast<double>(samples.size());
  est.mean_exact /= m;
  est.term_qk /= m;
  est.term_v /= m;
  est.cross_term /= m;
  return est;
}

std::vector<LatentTokens> whitened_gaussian_samples(std::size_t m_samples, std::size_t n_tokens,
                                                    std::size_t d, std::uint64_t seed) {
  std::vector<LatentTokens> out;
  out.reserve(m_samples);
  for (std::size_t i = 0; i < m_samples; ++i) {
    Rng rng(derive_seed(seed, i));
    out.push_back({gaussian_matrix(n_tokens, d, rng), std::nullopt});
  }
  return out;
}

AttentionWeights random_attention_weights(std::size_t d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0x5eed));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  Matrix q = gaussian_matrix(d, d, rng, scale);
  Matrix k = gaussian_matrix(d, d, rng, scale);
  Matrix v = gaussian_matrix(d, d, rng, scale);
  return AttentionWeights(std::move(q), std::move(k), std::move(v));
}

}  // namespace attnedit
