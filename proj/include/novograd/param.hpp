#pragma once

// Parameter model shared by every optimizer: named flat layers, their
// gradient buffers, and the deterministic reductions over them.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "novograd/error.hpp"

namespace novograd {

/// Sum of squares, accumulated strictly left to right so that the result is
/// bit-reproducible for a given element order.
template <typename Real>
Real l2_norm_sq(std::span<const Real> v) {
  if (v.empty()) throw Error("empty layer");
  Real acc = 0;
  for (const Real x : v) acc += x * x;
  return acc;
}

template <typename Real>
Real l2_norm(std::span<const Real> v) {
  return std::sqrt(l2_norm_sq(v));
}

/// One trainable tensor, flattened. The unit of layer-wise normalization:
/// a weight matrix and its bias are two separate layers.
template <typename Real = double>
class ParameterLayer {
 public:
  using value_type = Real;

  ParameterLayer(std::string id, std::vector<Real> weights)
      : id_(std::move(id)), weights_(std::move(weights)), grad_(weights_.size(), Real{0}) {
    if (weights_.empty()) throw Error("layer '" + id_ + "' has no elements");
  }

  ParameterLayer(std::string id, std::size_t size, Real fill = 0)
      : ParameterLayer(std::move(id), std::vector<Real>(size, fill)) {}

  const std::string& id() const noexcept { return id_; }
  std::size_t size() const noexcept { return weights_.size(); }

  std::span<Real> weights() noexcept { return weights_; }
  std::span<const Real> weights() const noexcept { return weights_; }
  std::span<Real> grad() noexcept { return grad_; }
  std::span<const Real> grad() const noexcept { return grad_; }

  void zero_grad() noexcept { std::fill(grad_.begin(), grad_.end(), Real{0}); }

  friend bool operator==(const ParameterLayer&, const ParameterLayer&) = default;

 private:
  std::string id_;
  std::vector<Real> weights_;
  std::vector<Real> grad_;
};

/// Ordered collection of layers. Order is fixed once built and every
/// optimizer walks layers in this order.
template <typename Real = double>
class ModelParams {
 public:
  using value_type = Real;
  using Layer = ParameterLayer<Real>;

  ModelParams() = default;
  explicit ModelParams(std::vector<Layer> layers) {
    for (auto& l : layers) add(std::move(l));
  }

  Layer& add(Layer layer) {
    if (find(layer.id()) != nullptr) throw Error("duplicate layer id '" + layer.id() + "'");
    layers_.push_back(std::move(layer));
    return layers_.back();
  }
  Layer& add(std::string id, std::vector<Real> weights) {
    return add(Layer(std::move(id), std::move(weights)));
  }

  std::size_t num_layers() const noexcept { return layers_.size(); }
  bool empty() const noexcept { return layers_.empty(); }

  std::size_t total_elements() const noexcept {
    std::size_t n = 0;
    for (const auto& l : layers_) n += l.size();
    return n;
  }

  Layer& operator[](std::size_t i) { return layers_.at(i); }
  const Layer& operator[](std::size_t i) const { return layers_.at(i); }

  Layer* find(std::string_view id) noexcept {
    for (auto& l : layers_)
      if (l.id() == id) return &l;
    return nullptr;
  }
  const Layer* find(std::string_view id) const noexcept {
    for (const auto& l : layers_)
      if (l.id() == id) return &l;
    return nullptr;
  }
  Layer& at(std::string_view id) {
    if (auto* l = find(id)) return *l;
    throw Error("no layer '" + std::string(id) + "'");
  }
  const Layer& at(std::string_view id) const {
    if (const auto* l = find(id)) return *l;
    throw Error("no layer '" + std::string(id) + "'");
  }

  auto begin() noexcept { return layers_.begin(); }
  auto end() noexcept { return layers_.end(); }
  auto begin() const noexcept { return layers_.begin(); }
  auto end() const noexcept { return layers_.end(); }

  friend bool operator==(const ModelParams&, const ModelParams&) = default;

 private:
  std::vector<Layer> layers_;
};

template <typename Real>
void zero_grads(ModelParams<Real>& params) noexcept {
  for (auto& layer : params) layer.zero_grad();
}

/// Optimizer families known to the state accounting.
enum class Algorithm { sgd_momentum, sngd, adam, adamw, novograd, novograd_ams };

inline std::string_view to_string(Algorithm a) noexcept {
  switch (a) {
    case Algorithm::sgd_momentum: return "sgd";
    case Algorithm::sngd: return "sngd";
    case Algorithm::adam: return "adam";
    case Algorithm::adamw: return "adamw";
    case Algorithm::novograd: return "novograd";
    case Algorithm::novograd_ams: return "novograd_ams";
  }
  return "?";
}

/// Persistent optimizer state size, in scalars. Step counters are not counted.
struct StateReport {
  Algorithm algorithm;
  std::size_t per_layer_scalars = 0;  // scalars kept per layer
  std::size_t full_vectors = 0;       // parameter-sized vectors kept
  std::size_t total_state_elements = 0;

  friend bool operator==(const StateReport&, const StateReport&) = default;
};

inline StateReport state_report(Algorithm algorithm, std::size_t total_elements,
                                std::size_t num_layers) {
  StateReport r{algorithm};
  switch (algorithm) {
    case Algorithm::adam:
    case Algorithm::adamw: r.full_vectors = 2; break;
    case Algorithm::sgd_momentum: r.full_vectors = 1; break;
    case Algorithm::sngd: break;
    case Algorithm::novograd:
      r.full_vectors = 1;
      r.per_layer_scalars = 1;
      break;
    case Algorithm::novograd_ams:
      r.full_vectors = 1;
      r.per_layer_scalars = 2;  // v and its running max
      break;
  }
  r.total_state_elements = r.full_vectors * total_elements + r.per_layer_scalars * num_layers;
  return r;
}

template <typename Real>
StateReport state_report(Algorithm algorithm, const ModelParams<Real>& params) {
  return state_report(algorithm, params.total_elements(), params.num_layers());
}

}  // namespace novograd
