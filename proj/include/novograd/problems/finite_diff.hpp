#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "novograd/problems/problem.hpp"

namespace novograd {

using LayerGradients = std::vector<std::vector<double>>;

/// Central differences, one coordinate at a time, with step
/// h_i = rel_step * (|w_i| + 1). Each coordinate is restored to its original
/// bits after probing.
inline LayerGradients finite_diff_grad(const Problem& problem, ModelParams<double>& params,
                                       std::span<const std::size_t> batch, double rel_step = 1e-6) {
  if (!(rel_step > 0.0)) throw Error("finite difference step must be > 0");
  LayerGradients out;
  out.reserve(params.num_layers());
  for (auto& layer : params) {
    std::vector<double> g(layer.size());
    auto w = layer.weights();
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double saved = w[i];
      const double h = rel_step * (std::abs(saved) + 1.0);
      w[i] = saved + h;
      const double up = problem.eval(params, batch);
      w[i] = saved - h;
      const double down = problem.eval(params, batch);
      w[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw Error("non-finite loss during finite differences in layer '" + layer.id() + "'");
      g[i] = (up - down) / (2.0 * h);
    }
    out.push_back(std::move(g));
  }
  return out;
}

/// ||a - b|| / max(||a||, ||b||); zero when both vectors are zero.
inline double relative_error(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error("relative_error: length mismatch");
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom == 0.0) return std::sqrt(diff);
  return std::sqrt(diff) / denom;
}

}  // namespace novograd
