#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "novograd/problems/dataset.hpp"
#include "novograd/problems/problem.hpp"

namespace novograd {

/// Binary logistic regression, mean log-loss, no regularization.
/// Layers: "w" (dim) and "b" (1).
class LogisticRegressionProblem final : public Problem {
 public:
  explicit LogisticRegressionProblem(std::shared_ptr<const Dataset> data) : data_(std::move(data)) {
    if (!data_ || data_->size() == 0) throw Error("logreg: empty dataset");
    if (data_->num_classes != 2) throw Error("logreg: dataset must be binary");
  }
  explicit LogisticRegressionProblem(Dataset data)
      : LogisticRegressionProblem(std::make_shared<const Dataset>(std::move(data))) {}

  std::string name() const override { return "logreg"; }
  std::size_t num_examples() const override { return data_->size(); }
  const Dataset& data() const noexcept { return *data_; }

  ModelParams<double> initial_params() const override {
    ModelParams<double> p;
    p.add("w", std::vector<double>(data_->dim, 0.0));
    p.add("b", std::vector<double>{0.0});
    return p;
  }

  ModelParams<double> random_params(Rng& rng) const override {
    auto p = initial_params();
    for (auto& layer : p)
      for (auto& x : layer.weights()) x = rng.normal();
    return p;
  }

  double eval(const ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    check(params, batch);
    double total = 0.0;
    for (const auto i : batch) total += example_loss(logit(params, i), data_->labels[i]);
    return total / static_cast<double>(batch.size());
  }

  double eval_grad(ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    check(params, batch);
    zero_grads(params);
    auto gw = params[0].grad();
    double gb = 0.0;
    double total = 0.0;
    for (const auto i : batch) {
      const double z = logit(params, i);
      const int y = data_->labels[i];
      total += example_loss(z, y);
      const double dz = sigmoid(z) - static_cast<double>(y);
      const auto x = data_->row(i);
      for (std::size_t k = 0; k < x.size(); ++k) gw[k] += dz * x[k];
      gb += dz;
    }
    const double n = static_cast<double>(batch.size());
    for (auto& g : gw) g /= n;
    params[1].grad()[0] = gb / n;
    return total / n;
  }

  double gradcheck_tolerance() const override { return 1e-6; }

  /// Fraction of `ds` classified correctly (threshold at logit 0).
  double accuracy(const ModelParams<double>& params, const Dataset& ds) const {
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      double z = params[1].weights()[0];
      const auto x = ds.row(i);
      for (std::size_t k = 0; k < x.size(); ++k) z += params[0].weights()[k] * x[k];
      if ((z > 0.0 ? 1 : 0) == ds.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
  }

  static double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

  /// log(1 + e^z) - y z, evaluated without overflow.
  static double example_loss(double z, int y) {
    const double softplus = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
    return softplus - static_cast<double>(y) * z;
  }

 private:
  void check(const ModelParams<double>& params, std::span<const std::size_t> batch) const {
    check_batch(batch);
    check_layout(params, initial_params(), "logreg");
  }

  double logit(const ModelParams<double>& params, std::size_t i) const {
    const auto w = params[0].weights();
    const auto x = data_->row(i);
    double z = params[1].weights()[0];
    for (std::size_t k = 0; k < x.size(); ++k) z += w[k] * x[k];
    return z;
  }

  std::shared_ptr<const Dataset> data_;
};

}  // namespace novograd
