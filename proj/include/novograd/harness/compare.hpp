#pragma once

// Optimizer comparison and learning-rate sweeps over TrajectoryLogs.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "novograd/harness/train.hpp"
#include "novograd/harness/trajectory_io.hpp"

namespace novograd {

struct ComparisonRow {
  std::string label;
  std::string optimizer;
  double final_loss = 0.0;
  double best_loss = 0.0;
  std::optional<std::size_t> steps_to_threshold;  // first logged step with loss <= threshold
  Termination termination = Termination::completed;
};

struct ComparisonTable {
  double threshold = 0.0;
  std::vector<ComparisonRow> rows;
  std::vector<TrajectoryLog> logs;  // same order as rows
};

/// Unique row labels: the optimizer label (or tag), with "-2", "-3", ...
/// appended to repeats in input order.
inline std::vector<std::string> run_labels(const std::vector<RunConfig>& cfgs) {
  std::vector<std::string> labels;
  std::map<std::string, int> seen;
  for (const auto& c : cfgs) {
    const auto base = c.optimizer.display_label();
    const int n = ++seen[base];
    labels.push_back(n == 1 ? base : base + "-" + std::to_string(n));
  }
  return labels;
}

inline ComparisonRow summarize(const TrajectoryLog& log, std::string label, double threshold) {
  ComparisonRow row;
  row.label = std::move(label);
  row.optimizer = optimizer_tag(log.config.optimizer.config);
  row.termination = log.termination;
  row.final_loss = log.final_loss;
  row.best_loss = std::numeric_limits<double>::infinity();
  for (const auto& r : log.records) {
    if (std::isfinite(r.loss)) row.best_loss = std::min(row.best_loss, r.loss);
    if (!row.steps_to_threshold && r.loss <= threshold) row.steps_to_threshold = r.step;
  }
  if (std::isfinite(log.final_loss)) row.best_loss = std::min(row.best_loss, log.final_loss);
  return row;
}

inline ComparisonTable compare_runs(const std::vector<RunConfig>& cfgs, double threshold) {
  if (cfgs.empty()) throw Error("compare_runs: no configurations");
  for (const auto& c : cfgs) {
    if (!(c.problem == cfgs.front().problem) || c.seed != cfgs.front().seed)
      throw Error("compare_runs: all runs must share the same problem and seed");
  }
  ComparisonTable table;
  table.threshold = threshold;
  const auto labels = run_labels(cfgs);
  for (std::size_t i = 0; i < cfgs.size(); ++i) {
    table.logs.push_back(train(cfgs[i]));
    table.rows.push_back(summarize(table.logs.back(), labels[i], threshold));
  }
  return table;
}

/// CSV: label,optimizer,final_loss,best_loss,steps_to_threshold,termination
/// (steps_to_threshold is empty when the threshold was never reached).
inline void write_csv(const ComparisonTable& table, std::ostream& out, const json& config_echo = json()) {
  if (!config_echo.is_null()) out << "# config: " << config_echo.dump() << '\n';
  out << "# threshold: " << format_double(table.threshold) << '\n';
  out << "label,optimizer,final_loss,best_loss,steps_to_threshold,termination\n";
  for (const auto& r : table.rows) {
    out << r.label << ',' << r.optimizer << ',' << format_double(r.final_loss) << ',' << format_double(r.best_loss)
        << ',' << (r.steps_to_threshold ? std::to_string(*r.steps_to_threshold) : std::string()) << ','
        << to_string(r.termination) << '\n';
  }
}

// ---- learning-rate sweeps ---------------------------------------------------

struct SweepRow {
  double lr = 0.0;
  double final_loss = 0.0;
  bool diverged = false;  // non-finite values, or final loss above the starting loss
  bool stable = false;    // not diverged and the optimality gap shrank by at least the tolerance
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double gap_tolerance = 0.0;

  /// Smallest and largest stable learning rates, if any.
  std::optional<std::pair<double, double>> stable_interval() const {
    std::optional<std::pair<double, double>> out;
    for (const auto& r : rows) {
      if (!r.stable) continue;
      if (!out) out = std::pair{r.lr, r.lr};
      out->first = std::min(out->first, r.lr);
      out->second = std::max(out->second, r.lr);
    }
    return out;
  }

  /// sqrt(lo * hi) of the stable interval.
  std::optional<double> stable_geometric_mean() const {
    const auto iv = stable_interval();
    if (!iv) return std::nullopt;
    return std::sqrt(iv->first * iv->second);
  }
};

/// `count` log-spaced points from lo to hi inclusive.
inline std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) throw Error("log_grid: need 0 < lo <= hi and count >= 1");
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    g[i] = lo * std::pow(hi / lo, frac);
  }
  return g;
}

/// Runs `base` once per base learning rate in `grid`. A point is stable when
/// (final - optimum) <= gap_tolerance * (initial - optimum); without a known
/// optimum the final loss is compared against gap_tolerance * initial loss.
inline SweepResult lr_sweep(const RunConfig& base, const std::vector<double>& grid, double gap_tolerance = 1e-2) {
  if (grid.empty()) throw Error("lr_sweep: empty grid");
  const auto problem = make_problem(base.problem);
  const auto optimum = problem->optimal_loss();
  SweepResult result;
  result.gap_tolerance = gap_tolerance;
  for (const double lr : grid) {
    RunConfig cfg = base;
    cfg.schedule.base_lr = lr;
    cfg.schedule.min_lr = std::min(cfg.schedule.min_lr, lr);
    const auto log = train(cfg, problem);
    SweepRow row;
    row.lr = lr;
    row.final_loss = log.final_loss;
    row.diverged = log.termination == Termination::diverged || !std::isfinite(log.final_loss) ||
                   log.final_loss > log.initial_loss;
    const double floor = optimum.value_or(0.0);
    row.stable = !row.diverged && (log.final_loss - floor) <= gap_tolerance * (log.initial_loss - floor);
    result.rows.push_back(row);
  }
  return result;
}

/// CSV: lr,final_loss,diverged,stable
inline void write_csv(const SweepResult& sweep, std::ostream& out, const json& config_echo = json()) {
  if (!config_echo.is_null()) out << "# config: " << config_echo.dump() << '\n';
  out << "lr,final_loss,diverged,stable\n";
  for (const auto& r : sweep.rows) {
    out << format_double(r.lr) << ',' << format_double(r.final_loss) << ',' << (r.diverged ? 1 : 0) << ','
        << (r.stable ? 1 : 0) << '\n';
  }
}

}  // namespace novograd
