#pragma once

// NovoGrad: SGD with momentum where each layer's gradient is normalized by a
// layer-wise second moment (one scalar per layer), plus weight decay.
//
// Per layer l and step t:
//   v   <- b2 * v + (1 - b2) * ||g||^2
//   vh  <- max(vh, v)                        (AMS variant only)
//   m   <- b1 * m + (g / (sqrt(v) + eps) + d * w)     cumulative style
//   m   <- b1 * m + (1 - b1) * (...)                  EMA style
//   w   <- w - lr * m                                 (d * w in the moment)
//   w   <- w - lr * (m + d * w)                       (d * w in the update)
//
// The first nonzero gradient of a layer initializes its moments instead:
//   v = ||g||^2,  m = g / ||g|| + d * w
// and the same weight update follows. A layer whose gradient is still all
// zero is left untouched until it sees a nonzero gradient.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "novograd/optim/common.hpp"
#include "novograd/param.hpp"

namespace novograd {

enum class FirstMomentStyle { cumulative, ema };
enum class WeightDecayPlacement { in_moment, decoupled_update };

struct NovoGradConfig {
  double beta1 = 0.95;
  double beta2 = 0.25;
  double weight_decay = 0.0;
  double epsilon = 1e-8;
  FirstMomentStyle first_moment = FirstMomentStyle::cumulative;
  WeightDecayPlacement wd_placement = WeightDecayPlacement::in_moment;
  bool ams = false;

  void validate() const {
    optim::check_unit_interval(beta1, "beta1", false);
    optim::check_unit_interval(beta2, "beta2", true);
    optim::check_non_negative(weight_decay, "weight_decay");
    // epsilon = 0 is accepted for exact scale-invariance experiments; the
    // step then treats a zero denominator as a zero normalized gradient.
    optim::check_non_negative(epsilon, "epsilon");
  }

  friend bool operator==(const NovoGradConfig&, const NovoGradConfig&) = default;
};

template <typename Real = double>
struct NovoGradLayerState {
  std::string id;
  bool initialized = false;
  std::vector<Real> m;
  Real v = 0;
  std::optional<Real> v_hat;  // engaged iff the AMS variant is on

  friend bool operator==(const NovoGradLayerState&, const NovoGradLayerState&) = default;
};

template <typename Real = double>
struct NovoGradState {
  std::vector<NovoGradLayerState<Real>> layers;
  std::size_t step_count = 0;

  /// Uninitialized state laid out for `params`; the first step initializes it.
  static NovoGradState empty_for(const ModelParams<Real>& params, const NovoGradConfig& cfg) {
    NovoGradState s;
    s.layers.reserve(params.num_layers());
    for (const auto& layer : params) {
      NovoGradLayerState<Real> ls;
      ls.id = layer.id();
      ls.m.assign(layer.size(), Real{0});
      if (cfg.ams) ls.v_hat = Real{0};
      s.layers.push_back(std::move(ls));
    }
    return s;
  }

  friend bool operator==(const NovoGradState&, const NovoGradState&) = default;
};

namespace detail {

template <typename Real>
void check_layout(const ModelParams<Real>& params, const NovoGradState<Real>& state,
                  const NovoGradConfig& cfg) {
  if (state.layers.size() != params.num_layers()) throw Error("optimizer state does not match model layout");
  for (std::size_t l = 0; l < state.layers.size(); ++l) {
    const auto& ls = state.layers[l];
    if (ls.id != params[l].id() || ls.m.size() != params[l].size())
      throw Error("optimizer state does not match layer '" + params[l].id() + "'");
    if (ls.v_hat.has_value() != cfg.ams) throw Error("optimizer state AMS flag does not match config");
  }
}

template <typename Real>
void apply_weight_update(std::span<Real> w, std::span<const Real> m, const NovoGradConfig& cfg, Real lr) {
  const Real d = static_cast<Real>(cfg.weight_decay);
  if (cfg.wd_placement == WeightDecayPlacement::decoupled_update && d != Real{0}) {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * (m[i] + d * w[i]);
  } else {
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = w[i] - lr * m[i];
  }
}

template <typename Real>
void novograd_init_layer(ParameterLayer<Real>& layer, NovoGradLayerState<Real>& ls,
                         const NovoGradConfig& cfg, Real lr, Real norm_sq) {
  const Real d = static_cast<Real>(cfg.weight_decay);
  const bool wd_in_moment = cfg.wd_placement == WeightDecayPlacement::in_moment && d != Real{0};
  const Real norm = std::sqrt(norm_sq);
  auto w = layer.weights();
  auto g = layer.grad();
  ls.v = norm_sq;
  if (ls.v_hat) *ls.v_hat = norm_sq;
  for (std::size_t i = 0; i < w.size(); ++i) {
    ls.m[i] = g[i] / norm;
    if (wd_in_moment) ls.m[i] += d * w[i];
  }
  ls.initialized = true;
  apply_weight_update<Real>(w, ls.m, cfg, lr);
}

template <typename Real>
void novograd_update_layer(ParameterLayer<Real>& layer, NovoGradLayerState<Real>& ls,
                           const NovoGradConfig& cfg, Real lr, Real norm_sq) {
  const Real b1 = static_cast<Real>(cfg.beta1);
  const Real b2 = static_cast<Real>(cfg.beta2);
  const Real d = static_cast<Real>(cfg.weight_decay);
  const Real eps = static_cast<Real>(cfg.epsilon);
  const bool wd_in_moment = cfg.wd_placement == WeightDecayPlacement::in_moment && d != Real{0};
  const bool ema = cfg.first_moment == FirstMomentStyle::ema;

  ls.v = b2 * ls.v + (Real{1} - b2) * norm_sq;
  Real second = ls.v;
  if (ls.v_hat) {
    *ls.v_hat = std::max(*ls.v_hat, ls.v);
    second = *ls.v_hat;
  }
  const Real denom = std::sqrt(second) + eps;

  auto w = layer.weights();
  auto g = layer.grad();
  for (std::size_t i = 0; i < w.size(); ++i) {
    Real term = denom > Real{0} ? g[i] / denom : Real{0};
    if (wd_in_moment) term += d * w[i];
    ls.m[i] = ema ? b1 * ls.m[i] + (Real{1} - b1) * term : b1 * ls.m[i] + term;
  }
  apply_weight_update<Real>(w, ls.m, cfg, lr);
}

}  // namespace detail

/// One NovoGrad update with learning rate `lr`. Layers that have not yet seen
/// a nonzero gradient are initialized from the current gradient instead.
template <typename Real>
void novograd_step(ModelParams<Real>& params, NovoGradState<Real>& state, const NovoGradConfig& cfg,
                   double lr) {
  cfg.validate();
  optim::check_lr(lr);
  detail::check_layout(params, state, cfg);
  optim::check_finite_grads(params);

  const Real rate = static_cast<Real>(lr);
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    auto& layer = params[l];
    auto& ls = state.layers[l];
    const Real norm_sq = l2_norm_sq<Real>(layer.grad());
    if (!ls.initialized) {
      if (norm_sq > Real{0}) detail::novograd_init_layer(layer, ls, cfg, rate, norm_sq);
    } else {
      detail::novograd_update_layer(layer, ls, cfg, rate, norm_sq);
    }
  }
  ++state.step_count;
}

/// Builds the state from the first gradient in `params` and applies the t=1
/// weight update with learning rate `lr`.
template <typename Real>
NovoGradState<Real> novograd_init(ModelParams<Real>& params, const NovoGradConfig& cfg, double lr) {
  if (params.empty()) throw Error("model has no layers");
  auto state = NovoGradState<Real>::empty_for(params, cfg);
  novograd_step(params, state, cfg, lr);
  return state;
}

}  // namespace novograd
