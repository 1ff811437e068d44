#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "bigcn/bitlinalg.hpp"
#include "bigcn/dense_matrix.hpp"
#include "bigcn/graph.hpp"

namespace bigcn {

/// Which magnitude the straight-through estimator gates the feature gradient on.
///  - kGradMagnitude: 1{|∂L/∂H̃| < 1}, the form used by the original Bi-GCN.
///  - kInputMagnitude: 1{|H| < 1}, the conventional hard-tanh STE.
enum class SteMode { kGradMagnitude, kInputMagnitude };

/// Inference may run either on packed bits or on the reconstructed float
/// matrices; training always uses the float path so dropout can be applied.
enum class KernelPath { kPacked, kFloatSimulation };

/// Latent full-precision weights of a binarized layer. Binarized afresh on
/// every forward pass.
struct BiGCNLayer {
  DenseMatrix weight;  // d_in × d_out

  std::size_t d_in() const { return weight.rows(); }
  std::size_t d_out() const { return weight.cols(); }
};

/// Intermediates of one binarized feature-extraction step H·W.
struct LayerCache {
  DenseMatrix h_in;          // input before binarization
  PackedBinMatrix features;  // F with per-row β
  PackedBinMatrix weights;   // B with per-column α
  DenseMatrix weight_latent;
  DenseMatrix zeta;
  DenseMatrix dropout_mask;  // empty when no dropout was applied
};

/// Inverted-dropout mask: entries are 0 with probability `rate`, otherwise 1/(1-rate).
DenseMatrix make_dropout_mask(std::size_t rows, std::size_t cols, double rate,
                              std::mt19937_64& rng);

/// ζ = β_i α_j (F_i ⊛ B_j). With a dropout mask the reconstructed H̃ is masked
/// before the product, which forces the float path.
LayerCache binary_feature_extract(const DenseMatrix& h_in, const DenseMatrix& weight_latent,
                                  KernelPath path, const DenseMatrix* dropout_mask = nullptr);

struct BinaryLinearGrads {
  DenseMatrix grad_h_tilde;   // ∂L/∂H̃, dropout mask already applied
  DenseMatrix grad_weight;    // ∂L/∂W for the latent weights
};

/// Backward of the binarized product given ∂L/∂ζ. The weight gradient keeps
/// the dependence of α on W; the feature gradient is the raw ∂L/∂H̃.
BinaryLinearGrads binary_feature_extract_backward(const LayerCache& cache,
                                                  const DenseMatrix& grad_zeta);

/// Straight-through estimator for sign(): zero the entries whose gate
/// magnitude is ≥ 1.
DenseMatrix ste_gate(const DenseMatrix& grad_h_tilde, const DenseMatrix& h_in, SteMode mode);

struct BiGCNOutput {
  DenseMatrix h_out;
  LayerCache cache;
};

/// H_out = Ã ζ. No nonlinearity: the sign binarization of the next layer's
/// input plays that role.
BiGCNOutput bigcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h_in,
                          const BiGCNLayer& layer, bool training,
                          const DenseMatrix* dropout_mask = nullptr,
                          KernelPath inference_path = KernelPath::kPacked);

struct BiGCNGrads {
  DenseMatrix grad_h_in;
  DenseMatrix grad_weight;
};

BiGCNGrads bigcn_backward(const LayerCache& cache, const NormalizedAdjacency& adj,
                          const DenseMatrix& grad_out, SteMode mode);

// Full-precision GCN baseline.

struct GcnCache {
  DenseMatrix h_in;  // after dropout
  DenseMatrix pre_activation;
  bool activation = false;
};

/// Ã (H W), followed by ReLU when `activation` is set.
DenseMatrix gcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h_in,
                        const DenseMatrix& weight, bool activation,
                        GcnCache* cache = nullptr);

struct GcnGrads {
  DenseMatrix grad_h_in;
  DenseMatrix grad_weight;
};

GcnGrads gcn_backward(const GcnCache& cache, const NormalizedAdjacency& adj,
                      const DenseMatrix& weight, const DenseMatrix& grad_out);

// Bi-GraphSAGE with a mean aggregator.

struct BiSageLayer {
  DenseMatrix self_weight;      // W_θ
  DenseMatrix neighbor_weight;  // W_n

  std::size_t d_in() const { return self_weight.rows(); }
  std::size_t d_out() const { return self_weight.cols(); }
};

struct BiSageCache {
  LayerCache self;
  LayerCache neighbor;
};

struct BiSageOutput {
  DenseMatrix h_out;
  BiSageCache cache;
};

/// h_i = W̃_θ ⊛ h̃_i + mean_{j∈N(i)} W̃_n ⊛ h̃_j. `neighbor_mean` comes from
/// mean_neighbor_operator(); nodes without neighbors get only the self term.
BiSageOutput bisage_forward(const CsrMatrix& neighbor_mean, const DenseMatrix& h_in,
                            const BiSageLayer& layer, bool training,
                            const DenseMatrix* dropout_mask = nullptr,
                            KernelPath inference_path = KernelPath::kPacked);

struct BiSageGrads {
  DenseMatrix grad_h_in;
  DenseMatrix grad_self_weight;
  DenseMatrix grad_neighbor_weight;
};

BiSageGrads bisage_backward(const BiSageCache& cache, const CsrMatrix& neighbor_mean,
                            const DenseMatrix& grad_out, SteMode mode);

// Loss.

struct LossResult {
  double loss = 0.0;
  DenseMatrix grad_logits;
};

/// Mean cross-entropy of softmax(logits) over masked rows. Gradient rows
/// outside the mask are exactly zero.
LossResult masked_softmax_xent(const DenseMatrix& logits, std::span<const int> labels,
                               const std::vector<bool>& mask);

/// Fraction of masked rows whose argmax matches the label.
double masked_accuracy(const DenseMatrix& logits, std::span<const int> labels,
                       const std::vector<bool>& mask);

// Batch normalization without affine parameters.

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.9;

struct BatchNormState {
  std::vector<double> running_mean;
  std::vector<double> running_var;
  bool initialized() const { return !running_mean.empty(); }
};

struct BatchNormCache {
  DenseMatrix normalized;
  std::vector<double> inv_std;
};

/// Per-column (x - μ) / sqrt(σ² + ε). Training mode uses batch statistics and
/// updates the running ones as r ← 0.9 r + 0.1 batch; inference mode uses the
/// running statistics (batch statistics when none exist yet).
DenseMatrix batch_norm_apply(const DenseMatrix& h, bool training, BatchNormState& state,
                             BatchNormCache* cache = nullptr);

DenseMatrix batch_norm_backward(const BatchNormCache& cache, const DenseMatrix& grad_out);

}  // namespace bigcn
