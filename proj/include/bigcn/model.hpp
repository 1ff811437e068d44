#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bigcn/graph.hpp"
#include "bigcn/layers.hpp"

namespace bigcn {

enum class LayerType { kBiGcn, kGcn, kBiSage };
enum class BatchNormPlacement { kNone, kInput, kEveryLayer };

std::string_view to_string(LayerType t);
std::string_view to_string(BatchNormPlacement p);
std::string_view to_string(SteMode m);
LayerType parse_layer_type(std::string_view s);
BatchNormPlacement parse_batch_norm(std::string_view s);
SteMode parse_ste_mode(std::string_view s);

/// Training hyperparameters. Defaults follow the citation-network protocol
/// (Adam lr 1e-3, 1000 epochs, patience 100, dropout 0.4).
struct ModelConfig {
  LayerType type = LayerType::kBiGcn;
  std::vector<std::size_t> widths;  // [d_in, hidden..., classes]
  double dropout = 0.4;
  double lr = 0.001;
  int max_epochs = 1000;
  int patience = 100;
  /// Unset means the per-type default: input-only for Bi-GCN, every layer
  /// for Bi-GraphSAGE, none for GCN.
  std::optional<BatchNormPlacement> batch_norm;
  SteMode ste = SteMode::kGradMagnitude;
  bool clip_latent = true;
  std::uint64_t seed = 0;

  BatchNormPlacement effective_batch_norm() const;
  std::size_t num_layers() const { return widths.empty() ? 0 : widths.size() - 1; }
  void validate() const;
};

/// Sparse operators a model needs for one graph, built once.
struct GraphOperators {
  NormalizedAdjacency adjacency;
  CsrMatrix neighbor_mean;

  static GraphOperators build(const AttributedGraph& g);
};

class Model {
 public:
  /// Xavier-uniform initialization seeded from `config.seed`.
  explicit Model(ModelConfig config);

  const ModelConfig& config() const { return config_; }
  std::size_t num_layers() const { return config_.num_layers(); }

  /// Latent weights; two per layer (self, neighbor) for Bi-GraphSAGE.
  std::vector<DenseMatrix>& parameters() { return params_; }
  const std::vector<DenseMatrix>& parameters() const { return params_; }
  std::vector<BatchNormState>& batch_norm_states() { return bn_states_; }
  const std::vector<BatchNormState>& batch_norm_states() const { return bn_states_; }

  /// Inference-mode logits.
  DenseMatrix logits(const GraphOperators& ops, const DenseMatrix& features,
                     KernelPath path = KernelPath::kPacked) const;

  /// Inference-mode outputs of every hidden layer (after ReLU for GCN).
  std::vector<DenseMatrix> hidden_activations(const GraphOperators& ops,
                                              const DenseMatrix& features,
                                              KernelPath path = KernelPath::kPacked) const;

  /// One training-mode forward and backward pass. Returns the masked loss and
  /// accuracy on `train_mask`; gradients are written to `grads` (one per
  /// parameter).
  struct StepResult {
    double loss = 0.0;
    double accuracy = 0.0;
  };
  StepResult forward_backward(const GraphOperators& ops, const DenseMatrix& features,
                              std::span<const int> labels, const std::vector<bool>& train_mask,
                              std::mt19937_64& dropout_rng, std::vector<DenseMatrix>& grads);

  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);

 private:
  struct Trace;
  DenseMatrix run(const GraphOperators& ops, const DenseMatrix& features, bool training,
                  KernelPath path, std::mt19937_64* dropout_rng, Trace* trace,
                  std::vector<DenseMatrix>* hidden) const;
  bool batch_norm_at(std::size_t layer) const;

  ModelConfig config_;
  std::vector<DenseMatrix> params_;
  // Mutable so inference stays const while training updates running stats.
  mutable std::vector<BatchNormState> bn_states_;
};

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> trace;
  double test_acc = 0.0;
  int best_epoch = 0;
  double best_val_loss = 0.0;
};

/// Full-batch training with early stopping on validation loss. The returned
/// model is the best-validation checkpoint; deterministic for a given seed.
TrainResult train(const ModelConfig& config, const AttributedGraph& graph,
                  const GraphOperators& ops);

}  // namespace bigcn
