#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "novograd/problems/problem.hpp"

namespace novograd {

/// f(x, y) = (a - x)^2 + b (y - x^2)^2 with a = 1, b = 100. One layer, "xy".
class RosenbrockProblem final : public Problem {
 public:
  static constexpr double kA = 1.0;
  static constexpr double kB = 100.0;

  explicit RosenbrockProblem(std::array<double, 2> init = {-1.2, 1.0}) : init_(init) {}

  static double value(double x, double y) {
    const double u = kA - x;
    const double r = y - x * x;
    return u * u + kB * r * r;
  }

  static std::array<double, 2> gradient(double x, double y) {
    const double r = y - x * x;
    return {-2.0 * (kA - x) - 4.0 * kB * x * r, 2.0 * kB * r};
  }

  std::string name() const override { return "rosenbrock"; }

  ModelParams<double> initial_params() const override {
    ModelParams<double> p;
    p.add("xy", {init_[0], init_[1]});
    return p;
  }

  ModelParams<double> random_params(Rng& rng) const override {
    ModelParams<double> p;
    p.add("xy", {rng.uniform(-2.0, 2.0), rng.uniform(-1.0, 3.0)});
    return p;
  }

  double eval(const ModelParams<double>& params, std::span<const std::size_t> /*batch*/) const override {
    check(params);
    const auto w = params[0].weights();
    return value(w[0], w[1]);
  }

  double eval_grad(ModelParams<double>& params, std::span<const std::size_t> /*batch*/) const override {
    check(params);
    const auto w = params[0].weights();
    const auto g = gradient(w[0], w[1]);
    params[0].grad()[0] = g[0];
    params[0].grad()[1] = g[1];
    return value(w[0], w[1]);
  }

  double gradcheck_tolerance() const override { return 1e-6; }
  std::optional<double> optimal_loss() const override { return 0.0; }

 private:
  static void check(const ModelParams<double>& params) {
    if (params.num_layers() != 1 || params[0].size() != 2) throw Error("rosenbrock: expects one layer of dimension 2");
  }

  std::array<double, 2> init_;
};

}  // namespace novograd
