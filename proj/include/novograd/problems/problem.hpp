#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "novograd/error.hpp"
#include "novograd/param.hpp"
#include "novograd/random.hpp"

namespace novograd {

/// A differentiable objective over a layered parameter set.
///
/// Losses are means over the batch. Problems without a dataset
/// (num_examples() == 0) ignore the batch argument. eval_grad() overwrites
/// every gradient buffer and returns exactly the value eval() would return.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;

  /// Deterministic starting point; also declares the layer layout.
  virtual ModelParams<double> initial_params() const = 0;

  /// Random point with the same layout, used by gradient checks.
  virtual ModelParams<double> random_params(Rng& rng) const = 0;

  virtual std::size_t num_examples() const { return 0; }

  virtual double eval(const ModelParams<double>& params, std::span<const std::size_t> batch) const = 0;
  virtual double eval_grad(ModelParams<double>& params, std::span<const std::size_t> batch) const = 0;

  /// Bound on the analytic-vs-finite-difference relative error per layer.
  virtual double gradcheck_tolerance() const = 0;

  /// Known minimum value, if any.
  virtual std::optional<double> optimal_loss() const { return std::nullopt; }

 protected:
  void check_batch(std::span<const std::size_t> batch) const {
    const std::size_t n = num_examples();
    if (n == 0) return;
    if (batch.empty()) throw Error("empty batch");
    for (const auto i : batch)
      if (i >= n) throw Error(name() + ": batch index " + std::to_string(i) + " out of range");
  }

  template <typename Real>
  static void check_layout(const ModelParams<Real>& params, const ModelParams<Real>& expected,
                           const std::string& who) {
    if (params.num_layers() != expected.num_layers()) throw Error(who + ": shape mismatch (layer count)");
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      if (params[l].id() != expected[l].id() || params[l].size() != expected[l].size())
        throw Error(who + ": shape mismatch at layer '" + params[l].id() + "'");
    }
  }
};

/// Multiplies every gradient of the wrapped problem by `scale`; losses are
/// unchanged. With a power-of-two scale this is exact in floating point.
class ScaledGradientProblem final : public Problem {
 public:
  ScaledGradientProblem(std::shared_ptr<const Problem> inner, double scale)
      : inner_(std::move(inner)), scale_(scale) {
    if (!inner_) throw Error("ScaledGradientProblem: null problem");
    if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("gradient scale must be finite and > 0");
  }

  std::string name() const override { return inner_->name(); }
  ModelParams<double> initial_params() const override { return inner_->initial_params(); }
  ModelParams<double> random_params(Rng& rng) const override { return inner_->random_params(rng); }
  std::size_t num_examples() const override { return inner_->num_examples(); }
  double eval(const ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    return inner_->eval(params, batch);
  }
  double eval_grad(ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    const double loss = inner_->eval_grad(params, batch);
    for (auto& layer : params)
      for (auto& g : layer.grad()) g *= scale_;
    return loss;
  }
  double gradcheck_tolerance() const override { return inner_->gradcheck_tolerance(); }
  std::optional<double> optimal_loss() const override { return inner_->optimal_loss(); }

  double scale() const noexcept { return scale_; }

 private:
  std::shared_ptr<const Problem> inner_;
  double scale_;
};

}  // namespace novograd
