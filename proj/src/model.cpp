#include "bigcn/model.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "binary_io.hpp"
#include "bigcn/optim.hpp"

namespace bigcn {

namespace {

constexpr std::string_view kModelMagic = "BGNM";
constexpr std::uint32_t kModelVersion = 1;

bool is_binarized(LayerType t) { return t != LayerType::kGcn; }

std::size_t params_per_layer(LayerType t) { return t == LayerType::kBiSage ? 2 : 1; }

DenseMatrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  DenseMatrix w(fan_in, fan_out);
  for (double& v : w.data()) v = dist(rng);
  return w;
}

}  // namespace

std::string_view to_string(LayerType t) {
  switch (t) {
    case LayerType::kBiGcn: return "bigcn";
    case LayerType::kGcn: return "gcn";
    case LayerType::kBiSage: return "bisage";
  }
  return "?";
}

std::string_view to_string(BatchNormPlacement p) {
  switch (p) {
    case BatchNormPlacement::kNone: return "none";
    case BatchNormPlacement::kInput: return "input";
    case BatchNormPlacement::kEveryLayer: return "every";
  }
  return "?";
}

std::string_view to_string(SteMode m) {
  return m == SteMode::kGradMagnitude ? "grad" : "input";
}

LayerType parse_layer_type(std::string_view s) {
  if (s == "bigcn") return LayerType::kBiGcn;
  if (s == "gcn") return LayerType::kGcn;
  if (s == "bisage") return LayerType::kBiSage;
  throw std::invalid_argument("unknown model type '" + std::string(s) + "'");
}

BatchNormPlacement parse_batch_norm(std::string_view s) {
  if (s == "none") return BatchNormPlacement::kNone;
  if (s == "input") return BatchNormPlacement::kInput;
  if (s == "every") return BatchNormPlacement::kEveryLayer;
  throw std::invalid_argument("unknown batch-norm placement '" + std::string(s) + "'");
}

SteMode parse_ste_mode(std::string_view s) {
  if (s == "grad") return SteMode::kGradMagnitude;
  if (s == "input") return SteMode::kInputMagnitude;
  throw std::invalid_argument("unknown STE mode '" + std::string(s) + "'");
}

BatchNormPlacement ModelConfig::effective_batch_norm() const {
  if (batch_norm) return *batch_norm;
  switch (type) {
    case LayerType::kBiGcn: return BatchNormPlacement::kInput;
    case LayerType::kBiSage: return BatchNormPlacement::kEveryLayer;
    case LayerType::kGcn: return BatchNormPlacement::kNone;
  }
  return BatchNormPlacement::kNone;
}

void ModelConfig::validate() const {
  if (widths.size() < 2) throw std::invalid_argument("ModelConfig: need at least two widths");
  for (std::size_t w : widths) {
    if (w < 1) throw std::invalid_argument("ModelConfig: widths must be >= 1");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) {
    throw std::invalid_argument("ModelConfig: dropout must lie in [0, 1)");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("ModelConfig: learning rate must be positive");
  if (max_epochs < 0) throw std::invalid_argument("ModelConfig: max_epochs must be >= 0");
  if (patience < 1) throw std::invalid_argument("ModelConfig: patience must be >= 1");
}

GraphOperators GraphOperators::build(const AttributedGraph& g) {
  return {normalize_adjacency(g), mean_neighbor_operator(g.num_nodes(), g.edges())};
}

struct Model::Trace {
  std::vector<BatchNormCache> bn;
  std::vector<LayerCache> bigcn;
  std::vector<GcnCache> gcn;
  std::vector<DenseMatrix> gcn_masks;
  std::vector<BiSageCache> sage;

  explicit Trace(std::size_t layers)
      : bn(layers), bigcn(layers), gcn(layers), gcn_masks(layers), sage(layers) {}
};

Model::Model(ModelConfig config) : config_(std::move(config)) {
  config_.validate();
  std::mt19937_64 rng(config_.seed);
  for (std::size_t l = 0; l < num_layers(); ++l) {
    for (std::size_t p = 0; p < params_per_layer(config_.type); ++p) {
      params_.push_back(xavier_uniform(config_.widths[l], config_.widths[l + 1], rng));
    }
  }
  bn_states_.resize(num_layers());
}

bool Model::batch_norm_at(std::size_t layer) const {
  switch (config_.effective_batch_norm()) {
    case BatchNormPlacement::kNone: return false;
    case BatchNormPlacement::kInput: return layer == 0;
    case BatchNormPlacement::kEveryLayer: return true;
  }
  return false;
}

DenseMatrix Model::run(const GraphOperators& ops, const DenseMatrix& features, bool training,
                       KernelPath path, std::mt19937_64* dropout_rng, Trace* trace,
                       std::vector<DenseMatrix>* hidden) const {
  if (features.cols() != config_.widths.front()) {
    throw std::invalid_argument("Model: feature dimension " + std::to_string(features.cols()) +
                                " does not match input width " +
                                std::to_string(config_.widths.front()));
  }
  DenseMatrix h = features;
  const std::size_t layers = num_layers();
  for (std::size_t l = 0; l < layers; ++l) {
    if (batch_norm_at(l)) {
      h = batch_norm_apply(h, training, bn_states_[l], trace ? &trace->bn[l] : nullptr);
    }
    DenseMatrix mask;
    if (training && l > 0 && config_.dropout > 0.0) {
      mask = make_dropout_mask(h.rows(), h.cols(), config_.dropout, *dropout_rng);
    }
    const DenseMatrix* mask_ptr = mask.empty() ? nullptr : &mask;
    const bool last = l + 1 == layers;

    switch (config_.type) {
      case LayerType::kBiGcn: {
        auto out = bigcn_forward(ops.adjacency, h, BiGCNLayer{params_[l]}, training, mask_ptr,
                                 path);
        if (trace) trace->bigcn[l] = std::move(out.cache);
        h = std::move(out.h_out);
        break;
      }
      case LayerType::kGcn: {
        const DenseMatrix h_in = mask_ptr ? hadamard(h, mask) : h;
        h = gcn_forward(ops.adjacency, h_in, params_[l], !last, trace ? &trace->gcn[l] : nullptr);
        if (trace) trace->gcn_masks[l] = std::move(mask);
        break;
      }
      case LayerType::kBiSage: {
        auto out = bisage_forward(ops.neighbor_mean, h,
                                  BiSageLayer{params_[2 * l], params_[2 * l + 1]}, training,
                                  mask_ptr, path);
        if (trace) trace->sage[l] = std::move(out.cache);
        h = std::move(out.h_out);
        break;
      }
    }
    if (hidden && !last) hidden->push_back(h);
  }
  return h;
}

DenseMatrix Model::logits(const GraphOperators& ops, const DenseMatrix& features,
                          KernelPath path) const {
  return run(ops, features, false, path, nullptr, nullptr, nullptr);
}

std::vector<DenseMatrix> Model::hidden_activations(const GraphOperators& ops,
                                                   const DenseMatrix& features,
                                                   KernelPath path) const {
  std::vector<DenseMatrix> hidden;
  run(ops, features, false, path, nullptr, nullptr, &hidden);
  return hidden;
}

Model::StepResult Model::forward_backward(const GraphOperators& ops, const DenseMatrix& features,
                                          std::span<const int> labels,
                                          const std::vector<bool>& train_mask,
                                          std::mt19937_64& dropout_rng,
                                          std::vector<DenseMatrix>& grads) {
  Trace trace(num_layers());
  const DenseMatrix out =
      run(ops, features, true, KernelPath::kFloatSimulation, &dropout_rng, &trace, nullptr);
  LossResult loss = masked_softmax_xent(out, labels, train_mask);
  StepResult result{loss.loss, masked_accuracy(out, labels, train_mask)};

  grads.assign(params_.size(), DenseMatrix());
  DenseMatrix g = std::move(loss.grad_logits);
  for (std::size_t l = num_layers(); l-- > 0;) {
    switch (config_.type) {
      case LayerType::kBiGcn: {
        auto r = bigcn_backward(trace.bigcn[l], ops.adjacency, g, config_.ste);
        grads[l] = std::move(r.grad_weight);
        g = std::move(r.grad_h_in);
        break;
      }
      case LayerType::kGcn: {
        auto r = gcn_backward(trace.gcn[l], ops.adjacency, params_[l], g);
        grads[l] = std::move(r.grad_weight);
        g = trace.gcn_masks[l].empty() ? std::move(r.grad_h_in)
                                       : hadamard(r.grad_h_in, trace.gcn_masks[l]);
        break;
      }
      case LayerType::kBiSage: {
        auto r = bisage_backward(trace.sage[l], ops.neighbor_mean, g, config_.ste);
        grads[2 * l] = std::move(r.grad_self_weight);
        grads[2 * l + 1] = std::move(r.grad_neighbor_weight);
        g = std::move(r.grad_h_in);
        break;
      }
    }
    if (l == 0) break;  // the input features need no gradient
    if (batch_norm_at(l)) g = batch_norm_backward(trace.bn[l], g);
  }
  return result;
}

void Model::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::write_magic(out, kModelMagic);
  io::write_le<std::uint32_t>(out, kModelVersion);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_.type));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_.effective_batch_norm()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(config_.widths.size()));
  for (std::size_t w : config_.widths) io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(w));
  for (const auto& p : params_)
    for (double v : p.data()) io::write_le<double>(out, v);
  for (const auto& s : bn_states_) {
    io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(s.running_mean.size()));
    for (double v : s.running_mean) io::write_le<double>(out, v);
    for (double v : s.running_var) io::write_le<double>(out, v);
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

Model Model::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  if (!io::read_magic(in, kModelMagic)) {
    throw std::runtime_error(path.string() + " is not a model file");
  }
  if (io::read_le<std::uint32_t>(in) != kModelVersion) {
    throw std::runtime_error(path.string() + ": unsupported model version");
  }
  ModelConfig config;
  const auto type = io::read_le<std::uint32_t>(in);
  const auto bn = io::read_le<std::uint32_t>(in);
  if (type > 2 || bn > 2) throw std::runtime_error(path.string() + ": corrupt header");
  config.type = static_cast<LayerType>(type);
  config.batch_norm = static_cast<BatchNormPlacement>(bn);
  const auto width_count = io::read_le<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < width_count; ++i) {
    config.widths.push_back(io::read_le<std::uint32_t>(in));
  }
  Model model(config);
  for (auto& p : model.params_)
    for (double& v : p.data()) v = io::read_le<double>(in);
  for (auto& s : model.bn_states_) {
    const auto width = io::read_le<std::uint32_t>(in);
    s.running_mean.resize(width);
    s.running_var.resize(width);
    for (double& v : s.running_mean) v = io::read_le<double>(in);
    for (double& v : s.running_var) v = io::read_le<double>(in);
  }
  return model;
}

TrainResult train(const ModelConfig& config, const AttributedGraph& graph,
                  const GraphOperators& ops) {
  config.validate();
  if (config.widths.front() != graph.feature_dim()) {
    throw std::invalid_argument("train: input width " + std::to_string(config.widths.front()) +
                                " != feature dimension " + std::to_string(graph.feature_dim()));
  }
  if (config.widths.back() != static_cast<std::size_t>(graph.num_classes())) {
    throw std::invalid_argument("train: output width " + std::to_string(config.widths.back()) +
                                " != class count " + std::to_string(graph.num_classes()));
  }
  if (graph.count(Split::kTrain) == 0 || graph.count(Split::kVal) == 0 ||
      graph.count(Split::kTest) == 0) {
    throw std::invalid_argument("train: train, validation and test masks must be non-empty");
  }

  const auto train_mask = graph.mask(Split::kTrain);
  const auto val_mask = graph.mask(Split::kVal);
  const auto test_mask = graph.mask(Split::kTest);
  const auto& labels = graph.labels();
  const auto& features = graph.features();

  Model model(config);
  std::mt19937_64 dropout_rng(config.seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<AdamState> adam(model.parameters().size());
  const AdamOptions adam_options{.lr = config.lr};
  const std::optional<double> clip =
      is_binarized(config.type) && config.clip_latent ? std::optional<double>(1.0) : std::nullopt;

  TrainResult result{model, {}, 0.0, 0, std::numeric_limits<double>::infinity()};
  int since_best = 0;
  std::vector<DenseMatrix> grads;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto step = model.forward_backward(ops, features, labels, train_mask, dropout_rng, grads);
    for (std::size_t i = 0; i < grads.size(); ++i) {
      adam_step(model.parameters()[i], grads[i], adam[i], adam_options, clip);
    }
    const DenseMatrix logits = model.logits(ops, features);
    const double val_loss = masked_softmax_xent(logits, labels, val_mask).loss;
    result.trace.push_back({epoch, step.loss, step.accuracy, val_loss,
                            masked_accuracy(logits, labels, val_mask)});
    if (val_loss < result.best_val_loss) {
      result.best_val_loss = val_loss;
      result.best_epoch = epoch;
      result.model = model;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }

  const DenseMatrix logits = result.model.logits(ops, features);
  if (result.trace.empty()) {
    result.best_val_loss = masked_softmax_xent(logits, labels, val_mask).loss;
  }
  result.test_acc = masked_accuracy(logits, labels, test_mask);
  return result;
}

}  // namespace bigcn
