#pragma once

// Subcommand implementations behind the `novograd` executable. Kept in a
// header so tests can drive them without spawning processes.
//
// Exit codes: 0 success, 1 usage or configuration error, 2 divergence (run).

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "novograd/harness/compare.hpp"
#include "novograd/harness/grad_check.hpp"
#include "novograd/harness/run_config.hpp"
#include "novograd/harness/train.hpp"
#include "novograd/harness/trajectory_io.hpp"
#include "novograd/json_util.hpp"

namespace novograd::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitDiverged = 2;

struct CliOptions {
  std::string config_path;
  std::vector<std::string> sets;  // KEY=VALUE, dotted keys, applied in order
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> format;
};

struct OutputSpec {
  std::filesystem::path dir = "out";
  std::string format = "csv";  // csv | jsonl
  bool write_dataset = false;

  std::string extension() const { return format == "jsonl" ? ".jsonl" : ".csv"; }
};

/// Sets `root[a][b]...` for KEY "a.b..."; numeric parts index arrays. VALUE is
/// parsed as JSON when possible and taken as a plain string otherwise.
inline void apply_override(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("--set expects KEY=VALUE, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw Error("--set: malformed key '" + key + "'");
    json* next = nullptr;
    if (node->is_array()) {
      std::size_t idx = 0;
      try {
        idx = std::stoul(part);
      } catch (const std::exception&) {
        throw Error("--set: '" + part + "' is not an array index in '" + key + "'");
      }
      if (idx >= node->size()) throw Error("--set: index out of range in '" + key + "'");
      next = &(*node)[idx];
    } else {
      if (node->is_null()) *node = json::object();
      if (!node->is_object()) throw Error("--set: '" + key + "' descends into a non-object");
      next = &(*node)[part];
    }
    if (dot == std::string::npos) {
      *next = std::move(value);
      return;
    }
    node = next;
    start = dot + 1;
  }
}

/// Reads the config file and applies flag overrides (flags win over file).
inline json load_config(const CliOptions& opts) {
  json doc = json::object();
  if (!opts.config_path.empty()) {
    std::ifstream in(opts.config_path);
    if (!in) throw Error("cannot read config '" + opts.config_path + "'");
    try {
      doc = json::parse(in);
    } catch (const json::parse_error& e) {
      throw Error("config '" + opts.config_path + "': " + e.what());
    }
  }
  for (const auto& s : opts.sets) apply_override(doc, s);
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.out_dir) doc["output"]["dir"] = *opts.out_dir;
  if (opts.format) doc["output"]["format"] = *opts.format;
  return doc;
}

inline OutputSpec output_from(StrictObject& root) {
  OutputSpec out;
  if (const json* j = root.child("output")) {
    StrictObject o(*j, "output");
    std::string dir = out.dir.string();
    o.get("dir", dir);
    out.dir = dir;
    o.get("format", out.format);
    o.get("write_dataset", out.write_dataset);
    o.finish();
  }
  if (out.format != "csv" && out.format != "jsonl")
    throw Error("key 'output.format': expected \"csv\" or \"jsonl\"");
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << content;
}

inline std::string serialize(const TrajectoryLog& log, const OutputSpec& out) {
  return out.format == "jsonl" ? to_jsonl_string(log) : to_csv_string(log);
}

inline void maybe_write_dataset(const RunConfig& cfg, const OutputSpec& out) {
  if (!out.write_dataset) return;
  if (cfg.problem.kind != ProblemKind::logreg && cfg.problem.kind != ProblemKind::mlp) return;
  std::ostringstream s;
  write_csv(make_datasets(cfg.problem).first, s);
  write_file(out.dir / "dataset.csv", s.str());
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
  }
  return kExitUsage;
}

// ---- run ----------------------------------------------------------------------

inline int cmd_run(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json doc = load_config(opts);
    StrictObject root(doc, "");
    const OutputSpec output = output_from(root);
    const RunConfig cfg = run_config_from(root);
    root.finish();

    const auto log = train(cfg);
    const auto path = output.dir / ("trajectory" + output.extension());
    write_file(path, serialize(log, output));
    maybe_write_dataset(cfg, output);
    out << "wrote " << path.string() << " (" << log.steps_completed << " steps, final_loss "
        << format_double(log.final_loss) << ")\n";
    if (log.termination == Termination::diverged) {
      err << "diverged: " << log.detail << '\n';
      return kExitDiverged;
    }
    return kExitOk;
  });
}

// ---- compare ------------------------------------------------------------------

inline int cmd_compare(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json doc = load_config(opts);
    StrictObject root(doc, "");
    const OutputSpec output = output_from(root);
    const json* list = root.child("optimizers");
    if (list == nullptr || !list->is_array()) throw Error("missing key 'optimizers' (a list of optimizer objects)");
    if (list->empty()) throw Error("'optimizers' is empty");
    double threshold = 0.0;
    if (const json* c = root.child("compare")) {
      StrictObject co(*c, "compare");
      co.get("threshold", threshold);
      co.finish();
    }
    const RunConfig base = run_config_from(root, false);
    root.finish();

    std::vector<RunConfig> cfgs;
    for (std::size_t i = 0; i < list->size(); ++i) {
      RunConfig c = base;
      const std::string path = "optimizers[" + std::to_string(i) + "]";
      json entry = (*list)[i];
      // An entry may carry its own tuned base learning rate.
      if (entry.is_object() && entry.contains("base_lr")) {
        if (!entry["base_lr"].is_number()) throw Error("key '" + path + ".base_lr': expected a number");
        c.schedule.base_lr = entry["base_lr"].get<double>();
        c.schedule.min_lr = std::min(c.schedule.min_lr, c.schedule.base_lr);
        entry.erase("base_lr");
      }
      c.optimizer = optimizer_spec_from_json(entry, path);
      c.validate();
      cfgs.push_back(std::move(c));
    }
    const auto table = compare_runs(cfgs, threshold);

    json echo = {{"threshold", threshold}, {"runs", json::array()}};
    for (const auto& c : cfgs) echo["runs"].push_back(to_json(c));
    std::ostringstream csv;
    write_csv(table, csv, echo);
    write_file(output.dir / "comparison.csv", csv.str());
    for (std::size_t i = 0; i < table.rows.size(); ++i)
      write_file(output.dir / (table.rows[i].label + output.extension()), serialize(table.logs[i], output));
    maybe_write_dataset(base, output);
    out << csv.str();
    return kExitOk;
  });
}

// ---- sweep --------------------------------------------------------------------

inline int cmd_sweep(const CliOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const json doc = load_config(opts);
    StrictObject root(doc, "");
    const OutputSpec output = output_from(root);
    std::vector<double> grid;
    double gap_tolerance = 1e-2;
    if (const json* s = root.child("sweep")) {
      StrictObject so(*s, "sweep");
      so.get("lr_grid", grid);
      if (so.has("lr_min") || so.has("lr_max") || so.has("points")) {
        if (!grid.empty()) throw Error("'sweep': give either lr_grid or lr_min/lr_max/points");
        const auto lo = so.require<double>("lr_min");
        const auto hi = so.require<double>("lr_max");
        const auto n = so.require<std::size_t>("points");
        grid = log_grid(lo, hi, n);
      }
      so.get("gap_tolerance", gap_tolerance);
      so.finish();
    }
    if (grid.empty()) throw Error("empty learning-rate grid ('sweep.lr_grid' or 'sweep.lr_min/lr_max/points')");
    for (const double lr : grid)
      if (!(lr > 0.0)) throw Error("learning rates in the sweep grid must be > 0");
    const RunConfig base = run_config_from(root);
    root.finish();

    const auto result = lr_sweep(base, grid, gap_tolerance);
    const json echo = {{"base", to_json(base)}, {"lr_grid", grid}, {"gap_tolerance", gap_tolerance}};
    std::ostringstream csv;
    write_csv(result, csv, echo);
    write_file(output.dir / "sweep.csv", csv.str());
    out << csv.str();
    return kExitOk;
  });
}

// ---- gradcheck ----------------------------------------------------------------

/// Problem instances used by `gradcheck <tag>`.
inline std::shared_ptr<const Problem> gradcheck_problem(const std::string& tag, std::uint64_t seed) {
  ProblemSpec spec;
  spec.seed = seed;
  if (tag == "quadratic") {
    spec.kind = ProblemKind::quadratic;
    spec.diag.clear();
    spec.dim = 8;
    spec.condition = 10.0;
  } else if (tag == "rosenbrock") {
    spec.kind = ProblemKind::rosenbrock;
  } else if (tag == "logreg") {
    spec.kind = ProblemKind::logreg;
    spec.dataset = {.seed = seed, .size = 64, .dim = 4, .task = DatasetTask::two_gaussians, .separation = 2.0};
  } else if (tag == "mlp") {
    spec.kind = ProblemKind::mlp;
    spec.hidden = 8;
    spec.dataset = {.seed = seed, .size = 64, .dim = 3, .task = DatasetTask::multiclass_blobs, .num_classes = 3,
                    .separation = 3.0};
  } else {
    throw Error("unknown problem '" + tag + "' (expected quadratic, rosenbrock, logreg or mlp)");
  }
  return make_problem(spec);
}

inline int cmd_gradcheck(const std::string& tag, std::uint64_t seed, std::size_t trials, std::ostream& out,
                         std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = gradcheck_problem(tag, seed);
    const auto report = grad_check(*problem, seed, trials);
    out << "problem " << report.problem << ", " << report.trials << " trials, tolerance "
        << format_double(report.tolerance) << '\n';
    for (std::size_t l = 0; l < report.layer_ids.size(); ++l)
      out << "  " << report.layer_ids[l] << ": max relative error " << format_double(report.max_rel_error[l]) << '\n';
    out << (report.passed() ? "PASS" : "FAIL") << '\n';
    return report.passed() ? kExitOk : kExitUsage;
  });
}

}  // namespace novograd::cli
