#include "bigcn/optim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bigcn {

void adam_step(DenseMatrix& param, const DenseMatrix& grad, AdamState& state,
               const AdamOptions& options, std::optional<double> clip) {
  if (param.rows() != grad.rows() || param.cols() != grad.cols()) {
    throw std::invalid_argument("adam_step: parameter and gradient shapes differ");
  }
  if (state.m.empty() && !param.empty()) {
    state.m = DenseMatrix(param.rows(), param.cols());
    state.v = DenseMatrix(param.rows(), param.cols());
  }
  if (state.m.rows() != param.rows() || state.m.cols() != param.cols()) {
    throw std::invalid_argument("adam_step: optimizer state shape differs from parameter");
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(options.beta1, t);
  const double bias2 = 1.0 - std::pow(options.beta2, t);

  auto p = param.data();
  const auto g = grad.data();
  auto m = state.m.data();
  auto v = state.v.data();
  for (std::size_t i = 0; i < p.size(); ++i) {
    m[i] = options.beta1 * m[i] + (1.0 - options.beta1) * g[i];
    v[i] = options.beta2 * v[i] + (1.0 - options.beta2) * g[i] * g[i];
    const double m_hat = m[i] / bias1;
    const double v_hat = v[i] / bias2;
    p[i] -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
    if (clip) p[i] = std::clamp(p[i], -*clip, *clip);
  }
}

}  // namespace bigcn
