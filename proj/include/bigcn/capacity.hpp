#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "bigcn/dense_matrix.hpp"

namespace bigcn {

/// Plug-in entropy (bits) of one neuron's samples, histogrammed into `bins`
/// equal-width intervals over the observed [min, max]. Samples equal to max
/// land in the last bin.
double bin_neuron_entropy(std::span<const double> samples, std::size_t bins);

struct EntropyEstimate {
  std::vector<double> per_neuron;  // bits
  double independent_sum = 0.0;    // Ĥ_ind
  std::size_t samples = 0;
  std::size_t bins = 0;
};

/// Per-column entropies of a samples × neurons activation matrix and their sum.
EntropyEstimate layer_entropy_independent(const DenseMatrix& activations, std::size_t bins);

struct CapacityBound {
  std::size_t d_bin_lower = 0;
  std::vector<double> layer_entropies;
  std::size_t d_fp = 0;  // widest source hidden layer
};

/// A binary layer of width d stores at most d bits, so the binary hidden width
/// must be at least ceil(max_l Ĥ_ind(h_l)).
CapacityBound capacity_lower_bound(std::span<const EntropyEstimate> layers);
CapacityBound capacity_lower_bound(std::span<const double> layer_entropies);

/// Activation dump: "BGNA", u32 samples, u32 neurons (little-endian), then
/// row-major float32 values.
void write_activation_dump(const std::filesystem::path& path, const DenseMatrix& activations);
DenseMatrix read_activation_dump(const std::filesystem::path& path);

}  // namespace bigcn
