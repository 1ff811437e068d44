#include "bigcn/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>

#include "binary_io.hpp"

namespace bigcn {

namespace {
constexpr std::string_view kDumpMagic = "BGNA";
}

double bin_neuron_entropy(std::span<const double> samples, std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("bin_neuron_entropy: bin count must be >= 1");
  if (samples.empty()) throw std::invalid_argument("bin_neuron_entropy: no samples");
  const auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end());
  const double lo = *lo_it;
  const double hi = *hi_it;
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("bin_neuron_entropy: non-finite sample");
  }
  if (hi == lo) return 0.0;

  std::vector<std::size_t> counts(bins, 0);
  const double scale = static_cast<double>(bins) / (hi - lo);
  for (double x : samples) {
    auto idx = static_cast<std::size_t>((x - lo) * scale);
    ++counts[std::min(idx, bins - 1)];
  }
  const double n = static_cast<double>(samples.size());
  double entropy = 0.0;
  for (std::size_t c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    entropy -= p * std::log2(p);
  }
  return std::max(entropy, 0.0);
}

EntropyEstimate layer_entropy_independent(const DenseMatrix& activations, std::size_t bins) {
  if (activations.cols() == 0) {
    throw std::invalid_argument("layer_entropy_independent: no neurons");
  }
  EntropyEstimate est;
  est.samples = activations.rows();
  est.bins = bins;
  est.per_neuron.reserve(activations.cols());
  for (std::size_t j = 0; j < activations.cols(); ++j) {
    const auto column = activations.column(j);
    est.per_neuron.push_back(bin_neuron_entropy(column, bins));
    est.independent_sum += est.per_neuron.back();
  }
  return est;
}

CapacityBound capacity_lower_bound(std::span<const double> layer_entropies) {
  if (layer_entropies.empty()) {
    throw std::invalid_argument("capacity_lower_bound: no hidden-layer estimates");
  }
  CapacityBound bound;
  bound.layer_entropies.assign(layer_entropies.begin(), layer_entropies.end());
  const double widest = *std::max_element(layer_entropies.begin(), layer_entropies.end());
  bound.d_bin_lower = static_cast<std::size_t>(std::ceil(widest));
  return bound;
}

CapacityBound capacity_lower_bound(std::span<const EntropyEstimate> layers) {
  std::vector<double> sums;
  std::size_t d_fp = 0;
  for (const auto& l : layers) {
    sums.push_back(l.independent_sum);
    d_fp = std::max(d_fp, l.per_neuron.size());
  }
  CapacityBound bound = capacity_lower_bound(std::span<const double>(sums));
  bound.d_fp = d_fp;
  return bound;
}

void write_activation_dump(const std::filesystem::path& path, const DenseMatrix& activations) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  io::write_magic(out, kDumpMagic);
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(activations.rows()));
  io::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(activations.cols()));
  for (double v : activations.data()) io::write_le<float>(out, static_cast<float>(v));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DenseMatrix read_activation_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open activation dump " + path.string());
  if (!io::read_magic(in, kDumpMagic)) {
    throw std::runtime_error(path.string() + " is not an activation dump");
  }
  const auto samples = io::read_le<std::uint32_t>(in);
  const auto neurons = io::read_le<std::uint32_t>(in);
  std::vector<double> values(static_cast<std::size_t>(samples) * neurons);
  for (double& v : values) v = io::read_le<float>(in);
  return DenseMatrix(samples, neurons, std::move(values));
}

}  // namespace bigcn
