#pragma once

// Deterministic training loop: micro-batch gradient accumulation, scheduled
// learning rate, optional LARC pre-scaling, metrics, checkpoint/resume.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "novograd/harness/run_config.hpp"
#include "novograd/optim/optimizer.hpp"
#include "novograd/random.hpp"
#include "novograd/schedule.hpp"

namespace novograd {

struct MetricsRecord {
  std::size_t step = 0;  // 1-based index of the update
  double lr = 0.0;       // scheduled (global) learning rate of this update
  double loss = 0.0;     // mean micro-batch loss at the pre-update weights
  std::vector<double> grad_norm;      // per layer, averaged gradient before LARC
  std::vector<double> second_moment;  // per layer after the update; empty if the optimizer has none
  std::int64_t wall_time_ns = 0;      // not serialized unless asked for

  bool same_values(const MetricsRecord& o) const {
    return step == o.step && lr == o.lr && loss == o.loss && grad_norm == o.grad_norm &&
           second_moment == o.second_moment;
  }
};

enum class Termination { completed, diverged };

inline std::string_view to_string(Termination t) { return t == Termination::diverged ? "diverged" : "completed"; }

struct TrajectoryLog {
  RunConfig config;
  std::vector<std::string> layer_ids;
  std::vector<MetricsRecord> records;
  ModelParams<double> final_params;
  Termination termination = Termination::completed;
  std::string detail;              // divergence reason
  std::size_t steps_completed = 0;
  double initial_loss = 0.0;       // full objective at the start point
  double final_loss = 0.0;         // full objective at final_params
};

inline std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return idx;
}

/// Full objective: mean over the whole dataset (or the plain value for
/// dataset-free problems).
inline double full_loss(const Problem& problem, const ModelParams<double>& params) {
  const auto idx = all_indices(problem.num_examples());
  return problem.eval(params, idx);
}

/// Example order for a run: position p of the example stream maps to an
/// index through a per-epoch permutation seeded by (seed, epoch), or to
/// p mod n for sequential sampling. A pure function of (seed, position), so
/// splitting k*B examples into k micro-batches of B sees the same examples.
class BatchSampler {
 public:
  BatchSampler(std::size_t num_examples, Sampling sampling, std::uint64_t seed)
      : n_(num_examples), sampling_(sampling), seed_(seed) {}

  std::vector<std::size_t> batch(std::size_t first_position, std::size_t size) {
    if (n_ == 0) return {};
    std::vector<std::size_t> out(size);
    for (std::size_t r = 0; r < size; ++r) out[r] = at(first_position + r);
    return out;
  }

  std::size_t at(std::size_t position) {
    const std::size_t offset = position % n_;
    if (sampling_ == Sampling::sequential) return offset;
    const std::size_t epoch = position / n_;
    if (!cached_epoch_ || *cached_epoch_ != epoch) {
      perm_ = all_indices(n_);
      Rng rng(derive_seed(seed_, 0xba7c0000ULL + epoch));
      rng.shuffle(std::span<std::size_t>(perm_));
      cached_epoch_ = epoch;
    }
    return perm_[offset];
  }

 private:
  std::size_t n_;
  Sampling sampling_;
  std::uint64_t seed_;
  std::optional<std::size_t> cached_epoch_;
  std::vector<std::size_t> perm_;
};

inline constexpr std::string_view kCheckpointFormat = "novograd.checkpoint";
inline constexpr int kCheckpointVersion = 1;

class Trainer {
 public:
  explicit Trainer(RunConfig cfg) : Trainer(cfg, make_problem(cfg.problem)) {}

  Trainer(RunConfig cfg, std::shared_ptr<const Problem> problem)
      : cfg_(std::move(cfg)),
        problem_(std::move(problem)),
        params_(problem_->initial_params()),
        optimizer_(cfg_.optimizer.config, params_),
        sampler_(problem_->num_examples(), cfg_.sampling, cfg_.seed),
        schedule_(cfg_.effective_schedule()) {
    cfg_.validate();
    for (const auto& layer : params_) log_.layer_ids.push_back(layer.id());
    log_.config = cfg_;
    log_.initial_loss = full_loss(*problem_, params_);
  }

  const RunConfig& config() const noexcept { return cfg_; }
  const Problem& problem() const noexcept { return *problem_; }
  const ModelParams<double>& params() const noexcept { return params_; }
  const Optimizer<double>& optimizer() const noexcept { return optimizer_; }
  std::size_t steps_completed() const noexcept { return step_; }
  bool diverged() const noexcept { return log_.termination == Termination::diverged; }
  bool done() const noexcept { return diverged() || step_ >= cfg_.total_steps; }

  /// Performs one optimizer update. Returns false once the run is over.
  bool step() {
    if (done()) return false;
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t t = step_ + 1;
    const std::size_t k = cfg_.accumulation;
    const std::size_t bsz = cfg_.batch_size;

    if (accum_.empty())
      for (const auto& layer : params_) accum_.emplace_back(layer.size());
    for (auto& a : accum_) std::fill(a.begin(), a.end(), 0.0);

    double loss_sum = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const auto batch = sampler_.batch(((t - 1) * k + j) * bsz, bsz);
      loss_sum += problem_->eval_grad(params_, batch);
      for (std::size_t l = 0; l < params_.num_layers(); ++l) {
        const auto g = params_[l].grad();
        for (std::size_t i = 0; i < g.size(); ++i) accum_[l][i] += g[i];
      }
    }
    const double kd = static_cast<double>(k);
    bool finite_grad = true;
    for (std::size_t l = 0; l < params_.num_layers(); ++l) {
      auto g = params_[l].grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = accum_[l][i] / kd;
        finite_grad = finite_grad && std::isfinite(g[i]);
      }
    }

    MetricsRecord rec;
    rec.step = t;
    rec.lr = lr_at(schedule_, t - 1);
    rec.loss = loss_sum / kd;
    if (!std::isfinite(rec.loss) || !finite_grad) {
      diverge(t, rec, !std::isfinite(rec.loss) ? "non-finite loss" : "non-finite gradient");
      return false;
    }
    for (const auto& layer : params_) rec.grad_norm.push_back(std::sqrt(l2_norm_sq<double>(layer.grad())));

    if (cfg_.larc) {
      for (std::size_t l = 0; l < params_.num_layers(); ++l) {
        const double w_norm = std::sqrt(l2_norm_sq<double>(params_[l].weights()));
        const double scale = larc_scale(w_norm, rec.grad_norm[l], rec.lr, *cfg_.larc);
        if (scale != 1.0)
          for (auto& g : params_[l].grad()) g *= scale;
      }
    }

    optimizer_.step(params_, rec.lr);
    step_ = t;
    if (auto v = optimizer_.layer_second_moments()) rec.second_moment = std::move(*v);
    rec.wall_time_ns = elapsed_ns(t0);

    for (const auto& layer : params_) {
      for (const double w : layer.weights()) {
        if (!std::isfinite(w)) {
          diverge(t, rec, "non-finite weights");
          return false;
        }
      }
    }
    if (t % cfg_.log_every == 0 || t == cfg_.total_steps) log_.records.push_back(std::move(rec));
    return !done();
  }

  /// Runs to completion (or divergence) and returns the trajectory.
  TrajectoryLog run() {
    while (step()) {
    }
    return finish();
  }

  TrajectoryLog finish() const {
    TrajectoryLog out = log_;
    out.final_params = params_;
    out.steps_completed = step_;
    out.final_loss = diverged() ? std::numeric_limits<double>::quiet_NaN() : full_loss(*problem_, params_);
    if (!std::isfinite(out.final_loss) && !diverged()) {
      out.termination = Termination::diverged;
      out.detail = "non-finite final loss";
    }
    return out;
  }

  /// Everything needed to continue this run bit-for-bit: weights, optimizer
  /// state, step counter and the records logged so far.
  json checkpoint() const {
    json params = json::object();
    for (const auto& layer : params_)
      params[layer.id()] = std::vector<double>(layer.weights().begin(), layer.weights().end());
    json records = json::array();
    for (const auto& r : log_.records) records.push_back(record_to_json(r));
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"step", step_},
            {"params", std::move(params)},
            {"optimizer", optimizer_.state_to_json()},
            {"records", std::move(records)}};
  }

  /// Restores a checkpoint taken from a run with the same configuration.
  void restore(const json& ckpt) {
    StrictObject o(ckpt, "");
    if (o.require<std::string>("format") != kCheckpointFormat) throw Error("not a checkpoint document");
    if (o.require<int>("version") != kCheckpointVersion) throw Error("unsupported checkpoint version");
    const auto step = o.require<std::size_t>("step");
    if (step > cfg_.total_steps) throw Error("checkpoint step beyond total_steps");
    const json* params = o.child("params");
    const json* opt = o.child("optimizer");
    const json* records = o.child("records");
    if (params == nullptr || opt == nullptr || records == nullptr) throw Error("incomplete checkpoint");
    o.finish();

    StrictObject po(*params, "params");
    ModelParams<double> restored = problem_->initial_params();
    for (auto& layer : restored) {
      const auto w = po.require<std::vector<double>>(layer.id());
      if (w.size() != layer.size()) throw Error("checkpoint layer '" + layer.id() + "' has wrong size");
      std::copy(w.begin(), w.end(), layer.weights().begin());
    }
    po.finish();
    auto optimizer = Optimizer<double>::from_json(*opt, restored);
    if (optimizer.tag() != optimizer_.tag()) throw Error("checkpoint optimizer does not match the run");

    std::vector<MetricsRecord> recs;
    for (const auto& r : *records) recs.push_back(record_from_json(r));

    params_ = std::move(restored);
    optimizer_ = std::move(optimizer);
    step_ = step;
    log_.records = std::move(recs);
  }

  static json record_to_json(const MetricsRecord& r, bool include_timing = false) {
    json j = {{"step", r.step}, {"lr", r.lr}, {"loss", r.loss}, {"grad_norm", r.grad_norm}};
    j["second_moment"] = r.second_moment.empty() ? json(nullptr) : json(r.second_moment);
    if (include_timing) j["wall_time_ns"] = r.wall_time_ns;
    return j;
  }

  static MetricsRecord record_from_json(const json& j) {
    MetricsRecord r;
    r.step = j.at("step").get<std::size_t>();
    r.lr = j.at("lr").get<double>();
    r.loss = j.at("loss").get<double>();
    r.grad_norm = j.at("grad_norm").get<std::vector<double>>();
    if (!j.at("second_moment").is_null()) r.second_moment = j.at("second_moment").get<std::vector<double>>();
    if (j.contains("wall_time_ns")) r.wall_time_ns = j.at("wall_time_ns").get<std::int64_t>();
    return r;
  }

 private:
  static std::int64_t elapsed_ns(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - t0).count();
  }

  void diverge(std::size_t t, MetricsRecord& rec, std::string reason) {
    log_.termination = Termination::diverged;
    log_.detail = std::move(reason) + " at step " + std::to_string(t);
    if (rec.grad_norm.empty())
      for (const auto& layer : params_) rec.grad_norm.push_back(std::sqrt(l2_norm_sq<double>(layer.grad())));
    log_.records.push_back(std::move(rec));
  }

  RunConfig cfg_;
  std::shared_ptr<const Problem> problem_;
  ModelParams<double> params_;
  Optimizer<double> optimizer_;
  BatchSampler sampler_;
  ScheduleSpec schedule_;
  std::vector<std::vector<double>> accum_;
  std::size_t step_ = 0;
  TrajectoryLog log_;
};

inline TrajectoryLog train(const RunConfig& cfg) { return Trainer(cfg).run(); }

inline TrajectoryLog train(const RunConfig& cfg, std::shared_ptr<const Problem> problem) {
  return Trainer(cfg, std::move(problem)).run();
}

}  // namespace novograd
