#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "novograd/optim/common.hpp"
#include "novograd/param.hpp"

namespace novograd {

/// Heavy-ball momentum with coupled L2 decay:  m <- mu*m + g + d*w,  w <- w - lr*m.
struct SgdMomentumConfig {
  double momentum = 0.9;
  double weight_decay = 0.0;

  void validate() const {
    optim::check_unit_interval(momentum, "momentum", false);
    optim::check_non_negative(weight_decay, "weight_decay");
  }

  friend bool operator==(const SgdMomentumConfig&, const SgdMomentumConfig&) = default;
};

template <typename Real = double>
struct SgdMomentumLayerState {
  std::string id;
  std::vector<Real> m;

  friend bool operator==(const SgdMomentumLayerState&, const SgdMomentumLayerState&) = default;
};

template <typename Real = double>
struct SgdMomentumState {
  std::vector<SgdMomentumLayerState<Real>> layers;
  std::size_t step_count = 0;

  static SgdMomentumState zeros_for(const ModelParams<Real>& params) {
    SgdMomentumState s;
    for (const auto& layer : params) s.layers.push_back({layer.id(), std::vector<Real>(layer.size(), Real{0})});
    return s;
  }

  friend bool operator==(const SgdMomentumState&, const SgdMomentumState&) = default;
};

template <typename Real>
void sgd_momentum_step(ModelParams<Real>& params, SgdMomentumState<Real>& state, const SgdMomentumConfig& cfg,
                       double lr) {
  cfg.validate();
  optim::check_lr(lr);
  if (state.layers.size() != params.num_layers()) throw Error("optimizer state does not match model layout");
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    if (state.layers[l].id != params[l].id() || state.layers[l].m.size() != params[l].size())
      throw Error("optimizer state does not match layer '" + params[l].id() + "'");
  }
  optim::check_finite_grads(params);

  const Real mu = static_cast<Real>(cfg.momentum);
  const Real d = static_cast<Real>(cfg.weight_decay);
  const Real rate = static_cast<Real>(lr);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    auto w = params[l].weights();
    auto g = params[l].grad();
    auto& m = state.layers[l].m;
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = mu * m[i] + g[i];
      if (d != Real{0}) m[i] += d * w[i];
      w[i] = w[i] - rate * m[i];
    }
  }
  ++state.step_count;
}

}  // namespace novograd
