#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "attnedit/matrix.hpp"

namespace attnedit {

/// Projection weights of one single-head self-attention layer, each d x d.
struct AttentionWeights {
  AttentionWeights(Matrix w_q, Matrix w_k, Matrix w_v);

  std::size_t d() const noexcept { return w_q.rows(); }

  Matrix w_q;
  Matrix w_k;
  Matrix w_v;
};

/// N x d token matrix entering a self-attention block, optionally tagged with
/// its denoising timestep.
struct LatentTokens {
  Matrix z;
  std::optional<std::uint32_t> timestep;

  std::size_t n_tokens() const noexcept { return z.rows(); }
  std::size_t d() const noexcept { return z.cols(); }
};

/// Unit d-vector; applied identically to every token row.
class PerturbationDirection {
 public:
  /// Throws Domain unless |‖n‖₂ - 1| <= 1e-12.
  explicit PerturbationDirection(Vector n);
  /// Scales n to unit length. Throws Domain for the zero vector.
  static PerturbationDirection normalized(Vector n);

  std::span<const double> values() const noexcept { return n_; }
  std::size_t d() const noexcept { return n_.size(); }

 private:
  Vector n_;
};

struct Projections {
  Matrix q;
  Matrix k;
  Matrix v;
};

/// Every intermediate of one forward pass.
struct AttentionTrace {
  Matrix q;
  Matrix k;
  Matrix v;
  Matrix logits;  // L = Q K^T / sqrt(d)
  Matrix scores;  // S = softmax(L), row-wise
  Matrix output;  // S V
};

Projections project_qkv(const LatentTokens& z, const AttentionWeights& w);

/// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(const Matrix& l);

/// Row i of the result is (diag(s) - s s^T) dl_i with s = softmax(l_i).
Matrix softmax_jacobian_apply(const Matrix& l, const Matrix& dl);

AttentionTrace attention_trace(const LatentTokens& z, const AttentionWeights& w);
Matrix attention_forward(const LatentTokens& z, const AttentionWeights& w);

/// Z + alpha * 1_N n^T.
LatentTokens perturbed(const LatentTokens& z, const PerturbationDirection& n, double alpha);

/// Attn(Z + alpha 1 n^T) - Attn(Z) from two full forward passes.
Matrix delta_attn_exact(const LatentTokens& z, const AttentionWeights& w,
                        const PerturbationDirection& n, double alpha);

/// The two pieces of the linearized output change: dS V and S dV.
struct FirstOrderTerms {
  Matrix ds_v;
  Matrix s_dv;
};

FirstOrderTerms first_order_terms(const AttentionTrace& base, const AttentionWeights& w,
                                  const PerturbationDirection& n, double alpha);

/// dS V + S dV with dL = (Q dK^T + dQ K^T)/sqrt(d) and dS = J_softmax(L) dL.
Matrix delta_attn_first_order(const LatentTokens& z, const AttentionWeights& w,
                              const PerturbationDirection& n, double alpha);

/// Sample means over a latent set. The first-order pieces satisfy
/// ‖dS V + S dV‖² = term_qk + term_v + 2 cross_term sample by sample.
struct SensitivityEstimate {
  std::size_t n_samples = 0;
  double mean_exact = 0.0;  // E‖ΔAttn_exact‖_F²
  double term_qk = 0.0;     // E‖dS V‖_F²
  double term_v = 0.0;      // E‖S dV‖_F²
  double cross_term = 0.0;  // E tr((dS V)^T (S dV))
};

/// A latent sample together with its unperturbed forward pass, so that many
/// directions can be evaluated without recomputing the base.
struct PreparedSample {
  LatentTokens tokens;
  AttentionTrace trace;
};

std::vector<PreparedSample> prepare_samples(std::span<const LatentTokens> samples,
                                            const AttentionWeights& w);

enum class SensitivityTerms {
  ExactAndDecomposition,
  ExactOnly,  // leaves term_qk, term_v and cross_term at zero
};

SensitivityEstimate empirical_sensitivity(
    std::span<const LatentTokens> samples, const AttentionWeights& w,
    const PerturbationDirection& n, double alpha,
    SensitivityTerms terms = SensitivityTerms::ExactAndDecomposition);
SensitivityEstimate empirical_sensitivity(
    std::span<const PreparedSample> samples, const AttentionWeights& w,
    const PerturbationDirection& n, double alpha,
    SensitivityTerms terms = SensitivityTerms::ExactAndDecomposition);

/// M latent samples with i.i.d. N(0, 1) entries. Sample i draws from its own
/// stream derive_seed(seed, i).
std::vector<LatentTokens> whitened_gaussian_samples(std::size_t m_samples, std::size_t n_tokens,
                                                    std::size_t d, std::uint64_t seed);

/// d x d weights with i.i.d. N(0, 1/d) entries (variance-preserving scale).
AttentionWeights random_attention_weights(std::size_t d, std::uint64_t seed);

}  // namespace attnedit
