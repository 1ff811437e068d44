#pragma once

#include <cstdint>
#include <optional>

#include "bigcn/dense_matrix.hpp"

namespace bigcn {

struct AdamOptions {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Per-parameter moment estimates. Lazily sized on the first step.
struct AdamState {
  DenseMatrix m;
  DenseMatrix v;
  std::int64_t step = 0;
};

/// One bias-corrected Adam update. When `clip` is set the parameter is clamped
/// to [-clip, clip] afterwards (latent binary weights use clip = 1).
void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state,
               const AdamOptions& options, std::optional<double> clip = std::nullopt);

}  // namespace bigcn
