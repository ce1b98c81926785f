#pragma once

// Run configuration and its JSON form. Parsing is fail-closed: unknown keys,
// wrong types and keys that do not apply to the selected kind are errors.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "novograd/json_util.hpp"
#include "novograd/optim/optimizer.hpp"
#include "novograd/problems/dataset.hpp"
#include "novograd/problems/logreg.hpp"
#include "novograd/problems/mlp.hpp"
#include "novograd/problems/quadratic.hpp"
#include "novograd/problems/rosenbrock.hpp"
#include "novograd/schedule.hpp"

namespace novograd {

enum class ProblemKind { quadratic, rosenbrock, logreg, mlp };

inline std::string_view to_string(ProblemKind k) {
  switch (k) {
    case ProblemKind::quadratic: return "quadratic";
    case ProblemKind::rosenbrock: return "rosenbrock";
    case ProblemKind::logreg: return "logreg";
    case ProblemKind::mlp: return "mlp";
  }
  return "?";
}

inline ProblemKind problem_kind_from_string(std::string_view s) {
  if (s == "quadratic") return ProblemKind::quadratic;
  if (s == "rosenbrock") return ProblemKind::rosenbrock;
  if (s == "logreg") return ProblemKind::logreg;
  if (s == "mlp") return ProblemKind::mlp;
  throw Error("unknown problem '" + std::string(s) + "'");
}

struct ProblemSpec {
  ProblemKind kind = ProblemKind::quadratic;

  // quadratic: A = diag(diag) when diag is non-empty, otherwise a random SPD
  // matrix of size dim with the given condition number (seeded by `seed`).
  std::vector<double> diag{2.0, 4.0};
  std::size_t dim = 0;
  double condition = 10.0;
  std::vector<double> b;     // empty: zeros (diagonal) or random (random SPD)
  std::vector<double> init;  // quadratic and rosenbrock start point; empty: default

  // logreg and mlp: `dataset.size` training examples plus `test_size` held-out
  // examples drawn from the same distribution
  DatasetSpec dataset{};
  std::size_t test_size = 0;
  std::size_t hidden = 16;
  double init_scale = 1.0;

  std::uint64_t seed = 0;  // random quadratic and MLP initialization
  double grad_scale = 1.0;  // multiplies every gradient; 1 leaves the problem as is

  friend bool operator==(const ProblemSpec&, const ProblemSpec&) = default;
};

struct OptimizerSpec {
  std::string label;  // row label in comparisons; defaults to the optimizer tag
  OptimizerConfig config = NovoGradConfig{};

  std::string display_label() const { return label.empty() ? optimizer_tag(config) : label; }
};

enum class Sampling { shuffled, sequential };

struct RunConfig {
  ProblemSpec problem;
  OptimizerSpec optimizer;
  ScheduleSpec schedule;  // total_steps is overridden by RunConfig::total_steps
  std::optional<LarcConfig> larc;
  std::size_t batch_size = 32;
  std::size_t accumulation = 1;
  Sampling sampling = Sampling::shuffled;
  std::size_t total_steps = 100;
  std::uint64_t seed = 0;
  std::size_t log_every = 1;

  ScheduleSpec effective_schedule() const {
    ScheduleSpec s = schedule;
    s.total_steps = total_steps;
    return s;
  }

  void validate() const {
    if (total_steps < 1) throw Error("total_steps must be >= 1");
    if (batch_size < 1) throw Error("batch_size must be >= 1");
    if (accumulation < 1) throw Error("accumulation must be >= 1");
    if (log_every < 1) throw Error("log_every must be >= 1");
    effective_schedule().validate();
    novograd::validate(optimizer.config);
    if (larc) larc->validate();
    if (!(problem.grad_scale > 0.0)) throw Error("grad_scale must be > 0");
  }
};

// ---- problem construction ---------------------------------------------------

/// Training and held-out parts of the problem's dataset.
inline std::pair<Dataset, Dataset> make_datasets(const ProblemSpec& spec) {
  DatasetSpec full = spec.dataset;
  full.size += spec.test_size;
  return split_dataset(generate_dataset(full), spec.dataset.size);
}

inline std::shared_ptr<const Problem> make_problem(const ProblemSpec& spec) {
  std::shared_ptr<const Problem> p;
  switch (spec.kind) {
    case ProblemKind::quadratic:
      if (!spec.diag.empty()) {
        p = std::make_shared<QuadraticProblem>(QuadraticProblem::diagonal(spec.diag, spec.b, spec.init));
      } else {
        if (spec.dim == 0) throw Error("quadratic: need diag or dim");
        auto q = QuadraticProblem::random_spd(spec.dim, spec.condition, spec.seed);
        if (!spec.b.empty() || !spec.init.empty()) {
          std::vector<double> a(q.matrix().begin(), q.matrix().end());
          std::vector<double> b = spec.b.empty() ? std::vector<double>(q.linear().begin(), q.linear().end()) : spec.b;
          auto init = spec.init;
          if (init.empty()) {
            const auto w0 = q.initial_params();
            init.assign(w0[0].weights().begin(), w0[0].weights().end());
          }
          q = QuadraticProblem(std::move(a), std::move(b), std::move(init));
        }
        p = std::make_shared<QuadraticProblem>(std::move(q));
      }
      break;
    case ProblemKind::rosenbrock:
      if (spec.init.empty()) {
        p = std::make_shared<RosenbrockProblem>();
      } else {
        if (spec.init.size() != 2) throw Error("rosenbrock: init must have 2 entries");
        p = std::make_shared<RosenbrockProblem>(std::array<double, 2>{spec.init[0], spec.init[1]});
      }
      break;
    case ProblemKind::logreg:
      p = std::make_shared<LogisticRegressionProblem>(make_datasets(spec).first);
      break;
    case ProblemKind::mlp:
      p = std::make_shared<MlpProblem>(make_datasets(spec).first, spec.hidden, spec.seed, spec.init_scale);
      break;
  }
  if (spec.grad_scale != 1.0) p = std::make_shared<ScaledGradientProblem>(p, spec.grad_scale);
  return p;
}

// ---- json -------------------------------------------------------------------

inline json to_json(const DatasetSpec& d) {
  return {{"task", to_string(d.task)}, {"seed", d.seed},         {"size", d.size},   {"dim", d.dim},
          {"num_classes", d.num_classes},  {"separation", d.separation}, {"noise", d.noise}};
}

inline DatasetSpec dataset_spec_from_json(const json& j, const std::string& path) {
  StrictObject o(j, path);
  DatasetSpec d;
  std::string task = std::string(to_string(d.task));
  o.get("task", task);
  d.task = dataset_task_from_string(task);
  o.get("seed", d.seed);
  o.get("size", d.size);
  o.get("dim", d.dim);
  o.get("num_classes", d.num_classes);
  o.get("separation", d.separation);
  o.get("noise", d.noise);
  o.finish();
  d.validate();
  return d;
}

inline json to_json(const ProblemSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case ProblemKind::quadratic:
      if (!p.diag.empty()) {
        j["diag"] = p.diag;
      } else {
        j["dim"] = p.dim;
        j["condition"] = p.condition;
        j["seed"] = p.seed;
      }
      j["b"] = p.b;
      j["init"] = p.init;
      break;
    case ProblemKind::rosenbrock: j["init"] = p.init; break;
    case ProblemKind::logreg:
      j["dataset"] = to_json(p.dataset);
      j["test_size"] = p.test_size;
      break;
    case ProblemKind::mlp:
      j["dataset"] = to_json(p.dataset);
      j["test_size"] = p.test_size;
      j["hidden"] = p.hidden;
      j["init_scale"] = p.init_scale;
      j["seed"] = p.seed;
      break;
  }
  j["grad_scale"] = p.grad_scale;
  return j;
}

inline ProblemSpec problem_spec_from_json(const json& j, const std::string& path = "problem") {
  StrictObject o(j, path);
  ProblemSpec p;
  p.kind = problem_kind_from_string(o.require<std::string>("kind"));
  o.get("grad_scale", p.grad_scale);
  switch (p.kind) {
    case ProblemKind::quadratic:
      if (o.has("dim") || o.has("condition")) p.diag.clear();
      o.get("diag", p.diag);
      o.get("dim", p.dim);
      o.get("condition", p.condition);
      o.get("seed", p.seed);
      o.get("b", p.b);
      o.get("init", p.init);
      break;
    case ProblemKind::rosenbrock: o.get("init", p.init); break;
    case ProblemKind::logreg:
      if (const json* d = o.child("dataset")) p.dataset = dataset_spec_from_json(*d, o.key_path("dataset"));
      o.get("test_size", p.test_size);
      break;
    case ProblemKind::mlp:
      p.dataset.task = DatasetTask::multiclass_blobs;
      p.dataset.num_classes = 3;
      if (const json* d = o.child("dataset")) {
        json merged = to_json(p.dataset);
        for (const auto& item : d->items()) merged[item.key()] = item.value();
        // unknown keys still surface because dataset_spec_from_json is strict
        p.dataset = dataset_spec_from_json(merged, o.key_path("dataset"));
      }
      o.get("test_size", p.test_size);
      o.get("hidden", p.hidden);
      o.get("init_scale", p.init_scale);
      o.get("seed", p.seed);
      break;
  }
  o.finish();
  return p;
}

inline json to_json(const OptimizerSpec& s) {
  json j = to_json(s.config);
  if (!s.label.empty()) j["label"] = s.label;
  return j;
}

inline OptimizerSpec optimizer_spec_from_json(const json& j, const std::string& path = "optimizer") {
  StrictObject o(j, path);
  OptimizerSpec s;
  o.get("label", s.label);
  s.config = optimizer_config_from(o);
  o.finish();
  return s;
}

inline json to_json(const ScheduleSpec& s) {
  return {{"family", to_string(s.family)}, {"base_lr", s.base_lr}, {"power", s.power},
          {"warmup_steps", s.warmup_steps}, {"min_lr", s.min_lr}};
}

inline ScheduleSpec schedule_spec_from_json(const json& j, const std::string& path = "schedule") {
  StrictObject o(j, path);
  ScheduleSpec s;
  std::string family = std::string(to_string(s.family));
  o.get("family", family);
  s.family = schedule_family_from_string(family);
  o.get("base_lr", s.base_lr);
  o.get("power", s.power);
  o.get("warmup_steps", s.warmup_steps);
  o.get("min_lr", s.min_lr);
  o.finish();
  return s;
}

inline json to_json(const LarcConfig& c) {
  return {{"trust_coefficient", c.trust_coefficient}, {"clip", c.clip}, {"eps_div", c.eps_div}};
}

inline LarcConfig larc_config_from_json(const json& j, const std::string& path = "larc") {
  StrictObject o(j, path);
  LarcConfig c;
  o.get("trust_coefficient", c.trust_coefficient);
  o.get("clip", c.clip);
  o.get("eps_div", c.eps_div);
  o.finish();
  c.validate();
  return c;
}

inline std::string_view to_string(Sampling s) { return s == Sampling::sequential ? "sequential" : "shuffled"; }

inline json to_json(const RunConfig& c) {
  json j;
  j["problem"] = to_json(c.problem);
  j["optimizer"] = to_json(c.optimizer);
  j["schedule"] = to_json(c.schedule);
  j["larc"] = c.larc ? to_json(*c.larc) : json(nullptr);
  j["batch_size"] = c.batch_size;
  j["accumulation"] = c.accumulation;
  j["sampling"] = to_string(c.sampling);
  j["total_steps"] = c.total_steps;
  j["seed"] = c.seed;
  j["log_every"] = c.log_every;
  return j;
}

/// Reads the run keys of `o`; callers with extra top-level keys (outputs,
/// optimizer lists, LR grids) consume those before calling o.finish().
inline RunConfig run_config_from(StrictObject& o, bool require_optimizer = true) {
  RunConfig c;
  if (const json* p = o.child("problem")) c.problem = problem_spec_from_json(*p, o.key_path("problem"));
  else throw Error("missing key '" + o.key_path("problem") + "'");
  if (const json* p = o.child("optimizer")) c.optimizer = optimizer_spec_from_json(*p, o.key_path("optimizer"));
  else if (require_optimizer) throw Error("missing key '" + o.key_path("optimizer") + "'");
  if (const json* p = o.child("schedule")) c.schedule = schedule_spec_from_json(*p, o.key_path("schedule"));
  if (const json* p = o.child("larc"); p != nullptr && !p->is_null()) c.larc = larc_config_from_json(*p, o.key_path("larc"));
  o.get("batch_size", c.batch_size);
  o.get("accumulation", c.accumulation);
  std::string sampling = std::string(to_string(c.sampling));
  o.get("sampling", sampling);
  if (sampling == "shuffled") c.sampling = Sampling::shuffled;
  else if (sampling == "sequential") c.sampling = Sampling::sequential;
  else throw Error("key '" + o.key_path("sampling") + "': expected \"shuffled\" or \"sequential\"");
  o.get("total_steps", c.total_steps);
  o.get("seed", c.seed);
  o.get("log_every", c.log_every);
  c.validate();
  return c;
}

inline RunConfig run_config_from_json(const json& j) {
  StrictObject o(j, "");
  auto c = run_config_from(o);
  o.finish();
  return c;
}

}  // namespace novograd
