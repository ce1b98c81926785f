#pragma once

#include <cmath>
#include <cstddef>

#include "novograd/optim/common.hpp"
#include "novograd/param.hpp"

namespace novograd {

/// Stochastic normalized gradient descent, per layer: w <- w - lr * g / (||g|| + eps).
struct SngdConfig {
  double epsilon = 1e-8;

  void validate() const { optim::check_non_negative(epsilon, "epsilon"); }

  friend bool operator==(const SngdConfig&, const SngdConfig&) = default;
};

template <typename Real>
void sngd_step(ModelParams<Real>& params, const SngdConfig& cfg, double lr) {
  cfg.validate();
  optim::check_lr(lr);
  optim::check_finite_grads(params);

  const Real eps = static_cast<Real>(cfg.epsilon);
  const Real rate = static_cast<Real>(lr);
  for (auto& layer : params) {
    const Real norm_sq = l2_norm_sq<Real>(layer.grad());
    if (norm_sq == Real{0}) continue;
    const Real denom = std::sqrt(norm_sq) + eps;
    auto w = layer.weights();
    auto g = layer.grad();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - rate * (g[i] / denom);
  }
}

}  // namespace novograd
