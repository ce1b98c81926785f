#pragma once

// Trajectory serialization.
//
// JSON Lines, one object per line:
//   {"type":"header","format":"novograd.trajectory","version":1,"config":{...},"layers":[ids]}
//   {"type":"record","step":..,"lr":..,"loss":..,"grad_norm":[..],"second_moment":[..]|null}   (one per record)
//   {"type":"summary","termination":"completed"|"diverged","detail":"..","steps_completed":..,
//    "initial_loss":..,"final_loss":..,"final_weights":{"<id>":[..],...}}
//
// CSV:
//   # config: {...compact json...}
//   step,lr,loss,grad_norm:<id>...,second_moment:<id>...      (second_moment columns only when present)
//   <one row per record>
//   # termination: <completed|diverged>; steps_completed=<n>; final_loss=<x>
//
// Numbers use the shortest representation that parses back to the same
// double, so files are byte-reproducible and lossless.

#include <ostream>
#include <sstream>
#include <string>

#include "novograd/harness/train.hpp"
#include "novograd/problems/dataset.hpp"

namespace novograd {

inline constexpr std::string_view kTrajectoryFormat = "novograd.trajectory";
inline constexpr int kTrajectoryVersion = 1;

inline void write_jsonl(const TrajectoryLog& log, std::ostream& out, bool include_timing = false) {
  json header = {{"type", "header"},
                 {"format", kTrajectoryFormat},
                 {"version", kTrajectoryVersion},
                 {"config", to_json(log.config)},
                 {"layers", log.layer_ids}};
  out << header.dump() << '\n';
  for (const auto& r : log.records) {
    json j = {{"type", "record"}};
    j.update(Trainer::record_to_json(r, include_timing));
    out << j.dump() << '\n';
  }
  json weights = json::object();
  for (const auto& layer : log.final_params)
    weights[layer.id()] = std::vector<double>(layer.weights().begin(), layer.weights().end());
  json summary = {{"type", "summary"},
                  {"termination", to_string(log.termination)},
                  {"detail", log.detail},
                  {"steps_completed", log.steps_completed},
                  {"initial_loss", log.initial_loss},
                  {"final_loss", log.final_loss},
                  {"final_weights", std::move(weights)}};
  out << summary.dump() << '\n';
}

inline void write_csv(const TrajectoryLog& log, std::ostream& out, bool include_timing = false) {
  out << "# config: " << to_json(log.config).dump() << '\n';
  const bool has_moments = !log.records.empty() && !log.records.front().second_moment.empty();
  out << "step,lr,loss";
  for (const auto& id : log.layer_ids) out << ",grad_norm:" << id;
  if (has_moments)
    for (const auto& id : log.layer_ids) out << ",second_moment:" << id;
  if (include_timing) out << ",wall_time_ns";
  out << '\n';
  for (const auto& r : log.records) {
    out << r.step << ',' << format_double(r.lr) << ',' << format_double(r.loss);
    for (const double g : r.grad_norm) out << ',' << format_double(g);
    if (has_moments) {
      for (std::size_t l = 0; l < log.layer_ids.size(); ++l)
        out << ',' << (l < r.second_moment.size() ? format_double(r.second_moment[l]) : std::string());
    }
    if (include_timing) out << ',' << r.wall_time_ns;
    out << '\n';
  }
  out << "# termination: " << to_string(log.termination) << "; steps_completed=" << log.steps_completed
      << "; final_loss=" << format_double(log.final_loss) << '\n';
}

inline std::string to_jsonl_string(const TrajectoryLog& log) {
  std::ostringstream s;
  write_jsonl(log, s);
  return s.str();
}

inline std::string to_csv_string(const TrajectoryLog& log) {
  std::ostringstream s;
  write_csv(log, s);
  return s.str();
}

}  // namespace novograd
