#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "novograd/problems/finite_diff.hpp"
#include "novograd/problems/problem.hpp"
#include "novograd/random.hpp"

namespace novograd {

struct GradCheckReport {
  std::string problem;
  std::size_t trials = 0;
  double tolerance = 0.0;
  std::vector<std::string> layer_ids;
  std::vector<double> max_rel_error;  // per layer, worst over all trials

  bool passed() const {
    return std::all_of(max_rel_error.begin(), max_rel_error.end(), [&](double e) { return e <= tolerance; });
  }
  double worst() const {
    return max_rel_error.empty() ? 0.0 : *std::max_element(max_rel_error.begin(), max_rel_error.end());
  }
};

/// Compares eval_grad() with central finite differences at `trials` random
/// points (and random batches of up to `batch_size` examples).
inline GradCheckReport grad_check(const Problem& problem, std::uint64_t seed, std::size_t trials,
                                  std::size_t batch_size = 16) {
  if (trials == 0) throw Error("grad_check: trials must be >= 1");
  Rng rng(derive_seed(seed, 0x9c));
  GradCheckReport report;
  report.problem = problem.name();
  report.trials = trials;
  report.tolerance = problem.gradcheck_tolerance();

  for (std::size_t t = 0; t < trials; ++t) {
    auto params = problem.random_params(rng);
    if (report.layer_ids.empty()) {
      for (const auto& layer : params) report.layer_ids.push_back(layer.id());
      report.max_rel_error.assign(params.num_layers(), 0.0);
    }
    std::vector<std::size_t> batch;
    if (const std::size_t n = problem.num_examples(); n > 0) {
      batch.resize(std::min(n, batch_size));
      for (auto& i : batch) i = rng.index(n);
    }
    problem.eval_grad(params, batch);
    const auto numeric = finite_diff_grad(problem, params, batch);
    for (std::size_t l = 0; l < params.num_layers(); ++l) {
      const double err = relative_error(params[l].grad(), numeric[l]);
      report.max_rel_error[l] = std::max(report.max_rel_error[l], err);
    }
  }
  return report;
}

}  // namespace novograd
