#include "bigcn/efficiency.hpp"

#include <stdexcept>
#include <string>

namespace bigcn {

namespace {

std::uint64_t ceil_div(std::uint64_t num, std::uint64_t den) { return (num + den - 1) / den; }

void require_positive(double v, const char* what) {
  if (!(v >= 1.0)) throw std::invalid_argument(std::string(what) + " must be >= 1");
}

std::uint64_t layer_cycles(std::uint64_t n, std::uint64_t e, std::uint64_t d_in,
                           std::uint64_t d_out, bool binarized, std::uint64_t k) {
  const std::uint64_t extraction =
      binarized ? ceil_div(n * d_in * d_out, k) + 2 * n * d_out : n * d_in * d_out;
  return extraction + e * d_out;
}

}  // namespace

ArchSpec ArchSpec::uniform(std::vector<std::uint64_t> widths, bool binarized) {
  ArchSpec arch;
  const std::size_t layers = widths.empty() ? 0 : widths.size() - 1;
  arch.widths = std::move(widths);
  arch.binarized.assign(layers, binarized);
  return arch;
}

void ArchSpec::validate() const {
  if (binarized.size() != num_layers()) {
    throw std::invalid_argument("ArchSpec: one binarized flag per layer required");
  }
  for (auto w : widths) {
    if (w < 1) throw std::invalid_argument("ArchSpec: widths must be >= 1");
  }
}

void GraphStats::validate() const {
  if (nodes < 1) throw std::invalid_argument("GraphStats: need at least one node");
  if (feature_dim < 1) throw std::invalid_argument("GraphStats: feature dimension must be >= 1");
}

double param_compression_ratio(double d_in) {
  require_positive(d_in, "d_in");
  return 32.0 * d_in / (d_in + 32.0);
}

double data_compression_ratio(double d) {
  require_positive(d, "feature dimension");
  return 32.0 * d / (d + 32.0);
}

AccelerationRatios acceleration_ratios(double d_in, double avg_degree,
                                       std::uint64_t ops_per_cycle) {
  require_positive(d_in, "d_in");
  if (!(avg_degree >= 0.0)) throw std::invalid_argument("average degree must be >= 0");
  const double k = static_cast<double>(ops_per_cycle);
  const double agg = k * avg_degree / 2.0;
  return {k * d_in / (d_in + 2.0 * k), (k * d_in + agg) / (d_in + 2.0 * k + agg)};
}

std::uint64_t cycle_ops(const ArchSpec& arch, const GraphStats& stats,
                        std::uint64_t ops_per_cycle) {
  arch.validate();
  std::uint64_t total = 0;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    total += layer_cycles(stats.nodes, stats.edges, arch.widths[l], arch.widths[l + 1],
                          arch.binarized[l], ops_per_cycle);
  }
  return total;
}

SizeBits model_size_bits(const ArchSpec& arch) {
  arch.validate();
  SizeBits bits;
  for (std::size_t l = 0; l < arch.num_layers(); ++l) {
    const std::uint64_t params = arch.widths[l] * arch.widths[l + 1];
    bits.float_bits += 32 * params;
    bits.binary_bits += arch.binarized[l] ? params + 32 * arch.widths[l + 1] : 32 * params;
  }
  return bits;
}

SizeBits data_size_bits(const GraphStats& stats) {
  return {32 * stats.nodes * stats.feature_dim, stats.nodes * stats.feature_dim + 32 * stats.nodes};
}

EfficiencyReport efficiency_report(const std::vector<std::uint64_t>& widths,
                                   const GraphStats& stats, std::uint64_t ops_per_cycle) {
  stats.validate();
  if (widths.size() < 2) throw std::invalid_argument("efficiency_report: need at least 2 widths");
  if (widths.front() != stats.feature_dim) {
    throw std::invalid_argument("efficiency_report: input width " +
                                std::to_string(widths.front()) + " != feature dimension " +
                                std::to_string(stats.feature_dim));
  }
  EfficiencyReport report;
  report.stats = stats;
  report.widths = widths;
  report.ops_per_cycle = ops_per_cycle;
  report.avg_degree = stats.avg_degree();

  const ArchSpec fp = ArchSpec::uniform(widths, false);
  const ArchSpec bin = ArchSpec::uniform(widths, true);
  report.model = {model_size_bits(fp).float_bits, model_size_bits(bin).binary_bits};
  report.data = data_size_bits(stats);
  report.data_compression = data_compression_ratio(static_cast<double>(stats.feature_dim));
  report.float_cycles = cycle_ops(fp, stats, ops_per_cycle);
  report.binary_cycles = cycle_ops(bin, stats, ops_per_cycle);

  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    LayerEfficiency layer;
    layer.d_in = widths[l];
    layer.d_out = widths[l + 1];
    layer.param_compression = param_compression_ratio(static_cast<double>(layer.d_in));
    const auto accel =
        acceleration_ratios(static_cast<double>(layer.d_in), report.avg_degree, ops_per_cycle);
    layer.accel_feature_extraction = accel.feature_extraction;
    layer.accel_full = accel.full;
    layer.float_cycles =
        layer_cycles(stats.nodes, stats.edges, layer.d_in, layer.d_out, false, ops_per_cycle);
    layer.binary_cycles =
        layer_cycles(stats.nodes, stats.edges, layer.d_in, layer.d_out, true, ops_per_cycle);
    report.layers.push_back(layer);
  }
  return report;
}

}  // namespace bigcn
