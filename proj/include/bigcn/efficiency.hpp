#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace bigcn {

/// Binary operations that fit in one multiply-add cycle on a 64-bit word.
inline constexpr std::uint64_t kBinaryOpsPerCycle = 64;

struct ArchSpec {
  std::vector<std::uint64_t> widths;  // [d_in^0, d_out^0 = d_in^1, ..., d_out^L]
  std::vector<bool> binarized;        // one flag per layer

  std::size_t num_layers() const { return widths.empty() ? 0 : widths.size() - 1; }
  /// Same flag for every layer.
  static ArchSpec uniform(std::vector<std::uint64_t> widths, bool binarized);
  void validate() const;
};

struct GraphStats {
  std::uint64_t nodes = 0;
  std::uint64_t edges = 0;  // undirected
  std::uint64_t feature_dim = 0;

  double avg_degree() const { return 2.0 * static_cast<double>(edges) / static_cast<double>(nodes); }
  void validate() const;
};

/// 32 d_in / (d_in + 32)
double param_compression_ratio(double d_in);
/// 32 d / (d + 32)
double data_compression_ratio(double d);

struct AccelerationRatios {
  double feature_extraction = 0.0;  // S_fe
  double full = 0.0;                // S_full, including the sparse aggregation
};

/// S_fe = k d_in / (d_in + 2k), S_full = (k d_in + k deg/2) / (d_in + 2k + k deg/2)
/// with k binary ops per cycle (k = 64 gives 64 d_in / (d_in + 128)).
AccelerationRatios acceleration_ratios(double d_in, double avg_degree,
                                       std::uint64_t ops_per_cycle = kBinaryOpsPerCycle);

/// Multiply-add cycles for one forward pass. A float layer costs N d_in d_out;
/// a binarized one ceil(N d_in d_out / k) + 2 N d_out; aggregation E d_out.
std::uint64_t cycle_ops(const ArchSpec& arch, const GraphStats& stats,
                        std::uint64_t ops_per_cycle = kBinaryOpsPerCycle);

struct SizeBits {
  std::uint64_t float_bits = 0;
  std::uint64_t binary_bits = 0;

  double ratio() const { return static_cast<double>(float_bits) / static_cast<double>(binary_bits); }
};

/// Float: 32 Σ d_in d_out. Binary: Σ (d_in d_out + 32 d_out) over binarized layers.
SizeBits model_size_bits(const ArchSpec& arch);
/// Float: 32 N d. Binary: N d + 32 N.
SizeBits data_size_bits(const GraphStats& stats);

inline double bits_to_kib(std::uint64_t bits) { return static_cast<double>(bits) / 8.0 / 1024.0; }
inline double bits_to_mib(std::uint64_t bits) { return bits_to_kib(bits) / 1024.0; }

struct LayerEfficiency {
  std::uint64_t d_in = 0;
  std::uint64_t d_out = 0;
  double param_compression = 0.0;
  double accel_feature_extraction = 0.0;
  double accel_full = 0.0;
  std::uint64_t float_cycles = 0;
  std::uint64_t binary_cycles = 0;
};

/// Full-precision versus fully binarized comparison for one architecture.
struct EfficiencyReport {
  GraphStats stats;
  std::vector<std::uint64_t> widths;
  std::uint64_t ops_per_cycle = kBinaryOpsPerCycle;
  double avg_degree = 0.0;
  SizeBits model;
  SizeBits data;
  std::uint64_t float_cycles = 0;
  std::uint64_t binary_cycles = 0;
  double data_compression = 0.0;
  std::vector<LayerEfficiency> layers;

  double cycle_ratio() const {
    return static_cast<double>(float_cycles) / static_cast<double>(binary_cycles);
  }
};

EfficiencyReport efficiency_report(const std::vector<std::uint64_t>& widths,
                                   const GraphStats& stats,
                                   std::uint64_t ops_per_cycle = kBinaryOpsPerCycle);

}  // namespace bigcn
