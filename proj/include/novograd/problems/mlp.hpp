#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "novograd/problems/dataset.hpp"
#include "novograd/problems/problem.hpp"

namespace novograd {

/// One hidden tanh layer, softmax cross-entropy. Layers, in order:
/// "W1" (hidden x dim), "b1" (hidden), "W2" (classes x hidden), "b2" (classes).
class MlpProblem final : public Problem {
 public:
  MlpProblem(std::shared_ptr<const Dataset> data, std::size_t hidden = 16, std::uint64_t init_seed = 0,
             double init_scale = 1.0)
      : data_(std::move(data)), hidden_(hidden), init_seed_(init_seed), init_scale_(init_scale) {
    if (!data_ || data_->size() == 0) throw Error("mlp: empty dataset");
    if (hidden_ == 0) throw Error("mlp: hidden width must be > 0");
    if (data_->num_classes < 2) throw Error("mlp: need at least two classes");
  }
  MlpProblem(Dataset data, std::size_t hidden = 16, std::uint64_t init_seed = 0, double init_scale = 1.0)
      : MlpProblem(std::make_shared<const Dataset>(std::move(data)), hidden, init_seed, init_scale) {}

  std::string name() const override { return "mlp"; }
  std::size_t num_examples() const override { return data_->size(); }
  const Dataset& data() const noexcept { return *data_; }
  std::size_t hidden() const noexcept { return hidden_; }
  std::size_t classes() const noexcept { return data_->num_classes; }

  /// Scaled-normal weights (std = init_scale / sqrt(fan_in)), zero biases.
  ModelParams<double> initial_params() const override {
    Rng rng(derive_seed(init_seed_, 0x111));
    return sample_params(rng, init_scale_, false);
  }

  ModelParams<double> random_params(Rng& rng) const override { return sample_params(rng, 1.0, true); }

  double eval(const ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    check(params, batch);
    Scratch s(*this);
    double total = 0.0;
    for (const auto i : batch) total += forward(params, data_->row(i), data_->labels[i], s);
    return total / static_cast<double>(batch.size());
  }

  double eval_grad(ModelParams<double>& params, std::span<const std::size_t> batch) const override {
    check(params, batch);
    zero_grads(params);
    Scratch s(*this);
    const std::size_t d = data_->dim, h = hidden_, c = classes();
    const auto w2 = params[2].weights();
    auto g_w1 = params[0].grad();
    auto g_b1 = params[1].grad();
    auto g_w2 = params[2].grad();
    auto g_b2 = params[3].grad();
    double total = 0.0;
    for (const auto i : batch) {
      const auto x = data_->row(i);
      const int y = data_->labels[i];
      total += forward(params, x, y, s);
      // dL/dlogits = p - onehot(y)
      for (std::size_t k = 0; k < c; ++k) s.prob[k] -= (static_cast<int>(k) == y ? 1.0 : 0.0);
      std::fill(s.dhidden.begin(), s.dhidden.end(), 0.0);
      for (std::size_t k = 0; k < c; ++k) {
        const double dz = s.prob[k];
        g_b2[k] += dz;
        for (std::size_t j = 0; j < h; ++j) {
          g_w2[k * h + j] += dz * s.hidden[j];
          s.dhidden[j] += w2[k * h + j] * dz;
        }
      }
      for (std::size_t j = 0; j < h; ++j) {
        const double da = s.dhidden[j] * (1.0 - s.hidden[j] * s.hidden[j]);
        g_b1[j] += da;
        for (std::size_t k = 0; k < d; ++k) g_w1[j * d + k] += da * x[k];
      }
    }
    const double n = static_cast<double>(batch.size());
    for (auto& layer : params)
      for (auto& g : layer.grad()) g /= n;
    return total / n;
  }

  double gradcheck_tolerance() const override { return 1e-5; }

  /// Class probabilities for one input.
  std::vector<double> predict_proba(const ModelParams<double>& params, std::span<const double> x) const {
    check_layout(params, layout(), "mlp");
    Scratch s(*this);
    forward(params, x, 0, s);
    return s.prob;
  }

  double accuracy(const ModelParams<double>& params, const Dataset& ds) const {
    if (ds.dim != data_->dim) throw Error("mlp: shape mismatch (input dim)");
    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const auto p = predict_proba(params, ds.row(i));
      const auto best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
      if (best == ds.labels[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.size());
  }

 private:
  struct Scratch {
    explicit Scratch(const MlpProblem& p) : hidden(p.hidden_), dhidden(p.hidden_), logits(p.classes()), prob(p.classes()) {}
    std::vector<double> hidden, dhidden, logits, prob;
  };

  ModelParams<double> layout() const {
    const std::size_t d = data_->dim, h = hidden_, c = classes();
    ModelParams<double> p;
    p.add("W1", std::vector<double>(h * d, 0.0));
    p.add("b1", std::vector<double>(h, 0.0));
    p.add("W2", std::vector<double>(c * h, 0.0));
    p.add("b2", std::vector<double>(c, 0.0));
    return p;
  }

  ModelParams<double> sample_params(Rng& rng, double scale, bool random_biases) const {
    const std::size_t d = data_->dim, h = hidden_;
    auto p = layout();
    const double s1 = scale / std::sqrt(static_cast<double>(d));
    const double s2 = scale / std::sqrt(static_cast<double>(h));
    for (auto& x : p[0].weights()) x = s1 * rng.normal();
    for (auto& x : p[2].weights()) x = s2 * rng.normal();
    if (random_biases) {
      for (auto& x : p[1].weights()) x = 0.5 * rng.normal();
      for (auto& x : p[3].weights()) x = 0.5 * rng.normal();
    }
    return p;
  }

  void check(const ModelParams<double>& params, std::span<const std::size_t> batch) const {
    check_batch(batch);
    check_layout(params, layout(), "mlp");
  }

  /// Fills s.hidden and s.prob; returns -log p[y].
  double forward(const ModelParams<double>& params, std::span<const double> x, int y, Scratch& s) const {
    const std::size_t d = data_->dim, h = hidden_, c = classes();
    const auto w1 = params[0].weights();
    const auto b1 = params[1].weights();
    const auto w2 = params[2].weights();
    const auto b2 = params[3].weights();
    for (std::size_t j = 0; j < h; ++j) {
      double a = b1[j];
      for (std::size_t k = 0; k < d; ++k) a += w1[j * d + k] * x[k];
      s.hidden[j] = std::tanh(a);
    }
    double max_logit = -INFINITY;
    for (std::size_t k = 0; k < c; ++k) {
      double z = b2[k];
      for (std::size_t j = 0; j < h; ++j) z += w2[k * h + j] * s.hidden[j];
      s.logits[k] = z;
      max_logit = std::max(max_logit, z);
    }
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) {
      s.prob[k] = std::exp(s.logits[k] - max_logit);
      sum += s.prob[k];
    }
    for (std::size_t k = 0; k < c; ++k) s.prob[k] /= sum;
    const double log_sum = std::log(sum) + max_logit;
    return log_sum - s.logits[static_cast<std::size_t>(y)];
  }

  std::shared_ptr<const Dataset> data_;
  std::size_t hidden_;
  std::uint64_t init_seed_;
  double init_scale_;
};

}  // namespace novograd
