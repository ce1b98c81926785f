#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "novograd/optim/common.hpp"
#include "novograd/param.hpp"

namespace novograd {

/// Adam with element-wise moments. `decoupled` turns it into AdamW: the decay
/// term d*w goes into the update instead of into the gradient.
struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
  bool bias_correction = true;
  bool decoupled = false;

  void validate() const {
    optim::check_unit_interval(beta1, "beta1", false);
    optim::check_unit_interval(beta2, "beta2", false);
    optim::check_non_negative(epsilon, "epsilon");
    optim::check_non_negative(weight_decay, "weight_decay");
  }

  friend bool operator==(const AdamConfig&, const AdamConfig&) = default;
};

template <typename Real = double>
struct AdamLayerState {
  std::string id;
  std::vector<Real> m;
  std::vector<Real> v;

  friend bool operator==(const AdamLayerState&, const AdamLayerState&) = default;
};

template <typename Real = double>
struct AdamState {
  std::vector<AdamLayerState<Real>> layers;
  std::size_t step_count = 0;

  static AdamState zeros_for(const ModelParams<Real>& params) {
    AdamState s;
    for (const auto& layer : params)
      s.layers.push_back({layer.id(), std::vector<Real>(layer.size(), Real{0}),
                          std::vector<Real>(layer.size(), Real{0})});
    return s;
  }

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

template <typename Real>
void adam_step(ModelParams<Real>& params, AdamState<Real>& state, const AdamConfig& cfg, double lr) {
  cfg.validate();
  optim::check_lr(lr);
  if (state.layers.size() != params.num_layers()) throw Error("optimizer state does not match model layout");
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    if (state.layers[l].id != params[l].id() || state.layers[l].m.size() != params[l].size())
      throw Error("optimizer state does not match layer '" + params[l].id() + "'");
  }
  optim::check_finite_grads(params);

  const std::size_t t = ++state.step_count;
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real eps = static_cast<Real>(cfg.epsilon);
  const Real d = static_cast<Real>(cfg.weight_decay);
  const Real rate = static_cast<Real>(lr);
  const Real bc1 = cfg.bias_correction ? static_cast<Real>(1.0 - std::pow(cfg.beta1, static_cast<double>(t))) : Real{1};
  const Real bc2 = cfg.bias_correction ? static_cast<Real>(1.0 - std::pow(cfg.beta2, static_cast<double>(t))) : Real{1};
  const bool coupled_decay = !cfg.decoupled && d != Real{0};
  const bool decoupled_decay = cfg.decoupled && d != Real{0};

  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    auto w = params[l].weights();
    auto g = params[l].grad();
    auto& m = state.layers[l].m;
    auto& v = state.layers[l].v;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const Real gi = coupled_decay ? g[i] + d * w[i] : g[i];
      m[i] = b1 * m[i] + (Real{1} - b1) * gi;
      v[i] = b2 * v[i] + (Real{1} - b2) * gi * gi;
      const Real m_hat = m[i] / bc1;
      const Real v_hat = v[i] / bc2;
      const Real denom = std::sqrt(v_hat) + eps;
      const Real dir = denom > Real{0} ? m_hat / denom : Real{0};
      w[i] = decoupled_decay ? w[i] - rate * (dir + d * w[i]) : w[i] - rate * dir;
    }
  }
}

/// AdamW: same as adam_step with the decay decoupled from the moments.
template <typename Real>
void adamw_step(ModelParams<Real>& params, AdamState<Real>& state, AdamConfig cfg, double lr) {
  cfg.decoupled = true;
  adam_step(params, state, cfg, lr);
}

}  // namespace novograd
