#include "bigcn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace bigcn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

std::string shape(const DenseMatrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          std::string(op) + ": shape mismatch " + shape(a) + " vs " + shape(b));
}

}  // namespace

DenseMatrix make_dropout_mask(std::size_t rows, std::size_t cols, double rate,
                              std::mt19937_64& rng) {
  require(rate >= 0.0 && rate < 1.0, "make_dropout_mask: rate must lie in [0, 1)");
  DenseMatrix mask(rows, cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  std::bernoulli_distribution drop(rate);
  for (double& m : mask.data()) m = drop(rng) ? 0.0 : keep_scale;
  return mask;
}

LayerCache binary_feature_extract(const DenseMatrix& h_in, const DenseMatrix& weight_latent,
                                  KernelPath path, const DenseMatrix* dropout_mask) {
  require(h_in.cols() == weight_latent.rows(),
          "binary_feature_extract: input " + shape(h_in) + " incompatible with weights " +
              shape(weight_latent));
  LayerCache cache;
  cache.h_in = h_in;
  cache.features = binarize_rows(h_in);
  cache.weights = binarize_columns(weight_latent);
  cache.weight_latent = weight_latent;
  if (dropout_mask != nullptr) {
    require_same_shape(*dropout_mask, h_in, "binary_feature_extract dropout mask");
    cache.dropout_mask = *dropout_mask;
  }

  if (path == KernelPath::kPacked && cache.dropout_mask.empty()) {
    cache.zeta = bin_gemm(cache.features, cache.weights);
  } else {
    DenseMatrix h_tilde = cache.features.reconstruct();
    if (!cache.dropout_mask.empty()) h_tilde = hadamard(h_tilde, cache.dropout_mask);
    cache.zeta = matmul(h_tilde, cache.weights.reconstruct());
  }
  return cache;
}

BinaryLinearGrads binary_feature_extract_backward(const LayerCache& cache,
                                                  const DenseMatrix& grad_zeta) {
  require(grad_zeta.rows() == cache.h_in.rows() && grad_zeta.cols() == cache.weights.cols(),
          "binary_feature_extract_backward: gradient " + shape(grad_zeta) +
              " does not match output " + std::to_string(cache.h_in.rows()) + "x" +
              std::to_string(cache.weights.cols()));

  DenseMatrix h_tilde = cache.features.reconstruct();
  if (!cache.dropout_mask.empty()) h_tilde = hadamard(h_tilde, cache.dropout_mask);
  const DenseMatrix w_tilde = cache.weights.reconstruct();

  BinaryLinearGrads grads;
  const DenseMatrix grad_w_tilde = matmul_at_b(h_tilde, grad_zeta);
  grads.grad_h_tilde = matmul_a_bt(grad_zeta, w_tilde);
  if (!cache.dropout_mask.empty()) {
    grads.grad_h_tilde = hadamard(grads.grad_h_tilde, cache.dropout_mask);
  }

  // ∂L/∂W_ij = (1/d_in) B_ij Σ_k ∂L/∂W̃_kj B_kj + α_j ∂L/∂W̃_ij 1{|W_ij| < 1}
  const std::size_t d_in = cache.weights.rows();
  const std::size_t d_out = cache.weights.cols();
  const auto alpha = cache.weights.scalars();
  std::vector<double> projected(d_out, 0.0);
  for (std::size_t k = 0; k < d_in; ++k)
    for (std::size_t j = 0; j < d_out; ++j)
      projected[j] += grad_w_tilde(k, j) * cache.weights.sign(k, j);

  grads.grad_weight = DenseMatrix(d_in, d_out);
  const double inv_d_in = 1.0 / static_cast<double>(d_in);
  for (std::size_t i = 0; i < d_in; ++i) {
    for (std::size_t j = 0; j < d_out; ++j) {
      const double b_ij = cache.weights.sign(i, j);
      const double ste = std::abs(cache.weight_latent(i, j)) < 1.0 ? 1.0 : 0.0;
      grads.grad_weight(i, j) =
          inv_d_in * b_ij * projected[j] + alpha[j] * grad_w_tilde(i, j) * ste;
    }
  }
  return grads;
}

DenseMatrix ste_gate(const DenseMatrix& grad_h_tilde, const DenseMatrix& h_in, SteMode mode) {
  require_same_shape(grad_h_tilde, h_in, "ste_gate");
  DenseMatrix out = grad_h_tilde;
  const auto gate = mode == SteMode::kGradMagnitude ? grad_h_tilde.data() : h_in.data();
  auto o = out.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!(std::abs(gate[i]) < 1.0)) o[i] = 0.0;
  }
  return out;
}

BiGCNOutput bigcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h_in,
                          const BiGCNLayer& layer, bool training,
                          const DenseMatrix* dropout_mask, KernelPath inference_path) {
  require(h_in.rows() == adj.num_nodes(),
          "bigcn_forward: input has " + std::to_string(h_in.rows()) + " rows, graph has " +
              std::to_string(adj.num_nodes()) + " nodes");
  const KernelPath path = training ? KernelPath::kFloatSimulation : inference_path;
  BiGCNOutput out;
  out.cache = binary_feature_extract(h_in, layer.weight, path, training ? dropout_mask : nullptr);
  out.h_out = aggregate(adj, out.cache.zeta);
  return out;
}

BiGCNGrads bigcn_backward(const LayerCache& cache, const NormalizedAdjacency& adj,
                          const DenseMatrix& grad_out, SteMode mode) {
  require(grad_out.rows() == adj.num_nodes() && grad_out.cols() == cache.zeta.cols(),
          "bigcn_backward: gradient " + shape(grad_out) + " does not match layer output " +
              shape(cache.zeta));
  const DenseMatrix grad_zeta = spmm_transposed(adj.csr, grad_out);
  auto grads = binary_feature_extract_backward(cache, grad_zeta);
  return {ste_gate(grads.grad_h_tilde, cache.h_in, mode), std::move(grads.grad_weight)};
}

DenseMatrix gcn_forward(const NormalizedAdjacency& adj, const DenseMatrix& h_in,
                        const DenseMatrix& weight, bool activation, GcnCache* cache) {
  require(h_in.cols() == weight.rows(),
          "gcn_forward: input " + shape(h_in) + " incompatible with weights " + shape(weight));
  DenseMatrix pre = aggregate(adj, matmul(h_in, weight));
  DenseMatrix out = pre;
  if (activation) {
    for (double& v : out.data()) v = std::max(v, 0.0);
  }
  if (cache != nullptr) {
    cache->h_in = h_in;
    cache->pre_activation = std::move(pre);
    cache->activation = activation;
  }
  return out;
}

GcnGrads gcn_backward(const GcnCache& cache, const NormalizedAdjacency& adj,
                      const DenseMatrix& weight, const DenseMatrix& grad_out) {
  require_same_shape(grad_out, cache.pre_activation, "gcn_backward");
  DenseMatrix grad_pre = grad_out;
  if (cache.activation) {
    auto g = grad_pre.data();
    const auto p = cache.pre_activation.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (p[i] <= 0.0) g[i] = 0.0;
    }
  }
  const DenseMatrix grad_z = spmm_transposed(adj.csr, grad_pre);
  return {matmul_a_bt(grad_z, weight), matmul_at_b(cache.h_in, grad_z)};
}

BiSageOutput bisage_forward(const CsrMatrix& neighbor_mean, const DenseMatrix& h_in,
                            const BiSageLayer& layer, bool training,
                            const DenseMatrix* dropout_mask, KernelPath inference_path) {
  require(h_in.rows() == neighbor_mean.rows,
          "bisage_forward: input has " + std::to_string(h_in.rows()) + " rows, graph has " +
              std::to_string(neighbor_mean.rows) + " nodes");
  require_same_shape(layer.self_weight, layer.neighbor_weight, "bisage_forward weights");
  const KernelPath path = training ? KernelPath::kFloatSimulation : inference_path;
  const DenseMatrix* mask = training ? dropout_mask : nullptr;
  BiSageOutput out;
  out.cache.self = binary_feature_extract(h_in, layer.self_weight, path, mask);
  out.cache.neighbor = binary_feature_extract(h_in, layer.neighbor_weight, path, mask);
  out.h_out = out.cache.self.zeta;
  axpy(1.0, spmm(neighbor_mean, out.cache.neighbor.zeta), out.h_out);
  return out;
}

BiSageGrads bisage_backward(const BiSageCache& cache, const CsrMatrix& neighbor_mean,
                            const DenseMatrix& grad_out, SteMode mode) {
  require_same_shape(grad_out, cache.self.zeta, "bisage_backward");
  auto self = binary_feature_extract_backward(cache.self, grad_out);
  auto nbr =
      binary_feature_extract_backward(cache.neighbor, spmm_transposed(neighbor_mean, grad_out));
  axpy(1.0, nbr.grad_h_tilde, self.grad_h_tilde);
  return {ste_gate(self.grad_h_tilde, cache.self.h_in, mode), std::move(self.grad_weight),
          std::move(nbr.grad_weight)};
}

LossResult masked_softmax_xent(const DenseMatrix& logits, std::span<const int> labels,
                               const std::vector<bool>& mask) {
  require(labels.size() == logits.rows() && mask.size() == logits.rows(),
          "masked_softmax_xent: labels/mask length does not match logits rows");
  const auto count = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), true));
  require(count > 0, "masked_softmax_xent: empty mask");

  LossResult result;
  result.grad_logits = DenseMatrix(logits.rows(), logits.cols());
  const double inv_count = 1.0 / static_cast<double>(count);
  std::vector<double> probs(logits.cols());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const int label = labels[i];
    require(label >= 0 && static_cast<std::size_t>(label) < logits.cols(),
            "masked_softmax_xent: label out of range at row " + std::to_string(i));
    const auto row = logits.row(i);
    const double row_max = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      probs[c] = std::exp(row[c] - row_max);
      sum += probs[c];
    }
    const double log_sum = std::log(sum);
    result.loss -= (row[static_cast<std::size_t>(label)] - row_max - log_sum);
    auto grad = result.grad_logits.row(i);
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double p = probs[c] / sum;
      grad[c] = (p - (static_cast<int>(c) == label ? 1.0 : 0.0)) * inv_count;
    }
  }
  result.loss *= inv_count;
  return result;
}

double masked_accuracy(const DenseMatrix& logits, std::span<const int> labels,
                       const std::vector<bool>& mask) {
  require(labels.size() == logits.rows() && mask.size() == logits.rows(),
          "masked_accuracy: labels/mask length does not match logits rows");
  std::size_t hits = 0;
  std::size_t total = 0;
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    if (!mask[i]) continue;
    const auto row = logits.row(i);
    const auto best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    hits += best == labels[i] ? 1 : 0;
    ++total;
  }
  require(total > 0, "masked_accuracy: empty mask");
  return static_cast<double>(hits) / static_cast<double>(total);
}

DenseMatrix batch_norm_apply(const DenseMatrix& h, bool training, BatchNormState& state,
                             BatchNormCache* cache) {
  require(h.rows() >= 1, "batch_norm_apply: empty batch");
  const std::size_t n = h.rows();
  const std::size_t d = h.cols();
  std::vector<double> mean(d, 0.0);
  std::vector<double> var(d, 0.0);
  const bool use_running = !training && state.initialized();
  if (use_running) {
    require(state.running_mean.size() == d, "batch_norm_apply: state width mismatch");
    mean = state.running_mean;
    var = state.running_var;
  } else {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) mean[c] += h(i, c);
    for (double& m : mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t c = 0; c < d; ++c) var[c] += (h(i, c) - mean[c]) * (h(i, c) - mean[c]);
    for (double& v : var) v /= static_cast<double>(n);
  }
  if (training) {
    if (!state.initialized()) {
      state.running_mean.assign(d, 0.0);
      state.running_var.assign(d, 1.0);
    }
    require(state.running_mean.size() == d, "batch_norm_apply: state width mismatch");
    for (std::size_t c = 0; c < d; ++c) {
      state.running_mean[c] =
          kBatchNormMomentum * state.running_mean[c] + (1.0 - kBatchNormMomentum) * mean[c];
      state.running_var[c] =
          kBatchNormMomentum * state.running_var[c] + (1.0 - kBatchNormMomentum) * var[c];
    }
  }

  std::vector<double> inv_std(d);
  for (std::size_t c = 0; c < d; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + kBatchNormEps);
  DenseMatrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < d; ++c) out(i, c) = (h(i, c) - mean[c]) * inv_std[c];
  if (cache != nullptr) {
    cache->normalized = out;
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

DenseMatrix batch_norm_backward(const BatchNormCache& cache, const DenseMatrix& grad_out) {
  require_same_shape(grad_out, cache.normalized, "batch_norm_backward");
  const std::size_t n = grad_out.rows();
  const std::size_t d = grad_out.cols();
  std::vector<double> sum_g(d, 0.0);
  std::vector<double> sum_gx(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      sum_g[c] += grad_out(i, c);
      sum_gx[c] += grad_out(i, c) * cache.normalized(i, c);
    }
  }
  DenseMatrix out(n, d);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < d; ++c) {
      out(i, c) = cache.inv_std[c] *
                  (grad_out(i, c) - inv_n * sum_g[c] - cache.normalized(i, c) * inv_n * sum_gx[c]);
    }
  }
  return out;
}

}  // namespace bigcn
