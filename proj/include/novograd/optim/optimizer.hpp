#pragma once

// Type-erased optimizer used by the training harness, plus the versioned
// JSON form of optimizer configs and states used for checkpoints.
//
// State document (version 1):
//   {
//     "format": "novograd.optimizer_state", "version": 1,
//     "config": { "kind": "novograd", ...every config field... },
//     "step_count": <int>,
//     "layers": [ { "id": "w", ...per-algorithm arrays/scalars... }, ... ]
//   }
// Per-layer fields: sgd {"m"}, adam/adamw {"m", "v"}, sngd {} and
// novograd {"initialized", "m", "v", "v_hat" (AMS only)}.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include "novograd/json_util.hpp"
#include "novograd/optim/adam.hpp"
#include "novograd/optim/novograd.hpp"
#include "novograd/optim/sgd.hpp"
#include "novograd/optim/sngd.hpp"
#include "novograd/param.hpp"

namespace novograd {

using OptimizerConfig = std::variant<SgdMomentumConfig, SngdConfig, AdamConfig, NovoGradConfig>;

inline constexpr int kOptimizerStateVersion = 1;
inline constexpr std::string_view kOptimizerStateFormat = "novograd.optimizer_state";

inline std::string optimizer_tag(const OptimizerConfig& cfg) {
  return std::visit(
      [](const auto& c) -> std::string {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, SgdMomentumConfig>) return "sgd";
        else if constexpr (std::is_same_v<C, SngdConfig>) return "sngd";
        else if constexpr (std::is_same_v<C, AdamConfig>) return c.decoupled ? "adamw" : "adam";
        else return "novograd";
      },
      cfg);
}

inline Algorithm optimizer_algorithm(const OptimizerConfig& cfg) {
  return std::visit(
      [](const auto& c) -> Algorithm {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, SgdMomentumConfig>) return Algorithm::sgd_momentum;
        else if constexpr (std::is_same_v<C, SngdConfig>) return Algorithm::sngd;
        else if constexpr (std::is_same_v<C, AdamConfig>) return c.decoupled ? Algorithm::adamw : Algorithm::adam;
        else return c.ams ? Algorithm::novograd_ams : Algorithm::novograd;
      },
      cfg);
}

inline void validate(const OptimizerConfig& cfg) {
  std::visit([](const auto& c) { c.validate(); }, cfg);
}

// ---- config <-> json --------------------------------------------------------

inline std::string_view to_string(FirstMomentStyle s) { return s == FirstMomentStyle::ema ? "ema" : "cumulative"; }
inline std::string_view to_string(WeightDecayPlacement p) {
  return p == WeightDecayPlacement::decoupled_update ? "decoupled_update" : "in_moment";
}

inline json to_json(const OptimizerConfig& cfg) {
  json j;
  j["kind"] = optimizer_tag(cfg);
  std::visit(
      [&j](const auto& c) {
        using C = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<C, SgdMomentumConfig>) {
          j["momentum"] = c.momentum;
          j["weight_decay"] = c.weight_decay;
        } else if constexpr (std::is_same_v<C, SngdConfig>) {
          j["epsilon"] = c.epsilon;
        } else if constexpr (std::is_same_v<C, AdamConfig>) {
          j["beta1"] = c.beta1;
          j["beta2"] = c.beta2;
          j["epsilon"] = c.epsilon;
          j["weight_decay"] = c.weight_decay;
          j["bias_correction"] = c.bias_correction;
        } else {
          j["beta1"] = c.beta1;
          j["beta2"] = c.beta2;
          j["epsilon"] = c.epsilon;
          j["weight_decay"] = c.weight_decay;
          j["first_moment"] = to_string(c.first_moment);
          j["wd_placement"] = to_string(c.wd_placement);
          j["ams"] = c.ams;
        }
      },
      cfg);
  return j;
}

/// Reads the keys of `obj` that belong to the optimizer named by its "kind".
/// The caller decides whether other keys are allowed (call obj.finish()).
inline OptimizerConfig optimizer_config_from(StrictObject& obj) {
  const auto kind = obj.require<std::string>("kind");
  if (kind == "sgd") {
    SgdMomentumConfig c;
    obj.get("momentum", c.momentum);
    obj.get("weight_decay", c.weight_decay);
    c.validate();
    return c;
  }
  if (kind == "sngd") {
    SngdConfig c;
    obj.get("epsilon", c.epsilon);
    c.validate();
    return c;
  }
  if (kind == "adam" || kind == "adamw") {
    AdamConfig c;
    c.decoupled = kind == "adamw";
    obj.get("beta1", c.beta1);
    obj.get("beta2", c.beta2);
    obj.get("epsilon", c.epsilon);
    obj.get("weight_decay", c.weight_decay);
    obj.get("bias_correction", c.bias_correction);
    c.validate();
    return c;
  }
  if (kind == "novograd") {
    NovoGradConfig c;
    obj.get("beta1", c.beta1);
    obj.get("beta2", c.beta2);
    obj.get("epsilon", c.epsilon);
    obj.get("weight_decay", c.weight_decay);
    obj.get("ams", c.ams);
    std::string style = std::string(to_string(c.first_moment));
    obj.get("first_moment", style);
    if (style == "cumulative") c.first_moment = FirstMomentStyle::cumulative;
    else if (style == "ema") c.first_moment = FirstMomentStyle::ema;
    else throw Error("key '" + obj.key_path("first_moment") + "': expected \"cumulative\" or \"ema\"");
    std::string placement = std::string(to_string(c.wd_placement));
    obj.get("wd_placement", placement);
    if (placement == "in_moment") c.wd_placement = WeightDecayPlacement::in_moment;
    else if (placement == "decoupled_update") c.wd_placement = WeightDecayPlacement::decoupled_update;
    else throw Error("key '" + obj.key_path("wd_placement") + "': expected \"in_moment\" or \"decoupled_update\"");
    c.validate();
    return c;
  }
  throw Error("key '" + obj.key_path("kind") + "': unknown optimizer '" + kind + "'");
}

inline OptimizerConfig optimizer_config_from_json(const json& j, const std::string& path = "optimizer") {
  StrictObject obj(j, path);
  auto cfg = optimizer_config_from(obj);
  obj.finish();
  return cfg;
}

// ---- runtime optimizer ------------------------------------------------------

template <typename Real = double>
class Optimizer {
 public:
  Optimizer(OptimizerConfig config, const ModelParams<Real>& params) : config_(std::move(config)) {
    validate(config_);
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, SgdMomentumConfig>) state_ = SgdMomentumState<Real>::zeros_for(params);
          else if constexpr (std::is_same_v<C, SngdConfig>) state_ = StatelessState{};
          else if constexpr (std::is_same_v<C, AdamConfig>) state_ = AdamState<Real>::zeros_for(params);
          else state_ = NovoGradState<Real>::empty_for(params, c);
        },
        config_);
  }

  const OptimizerConfig& config() const noexcept { return config_; }
  std::string tag() const { return optimizer_tag(config_); }
  Algorithm algorithm() const { return optimizer_algorithm(config_); }

  void step(ModelParams<Real>& params, double lr) {
    std::visit(
        [&](const auto& c) {
          using C = std::decay_t<decltype(c)>;
          if constexpr (std::is_same_v<C, SgdMomentumConfig>) {
            sgd_momentum_step(params, std::get<SgdMomentumState<Real>>(state_), c, lr);
          } else if constexpr (std::is_same_v<C, SngdConfig>) {
            sngd_step(params, c, lr);
            ++std::get<StatelessState>(state_).step_count;
          } else if constexpr (std::is_same_v<C, AdamConfig>) {
            adam_step(params, std::get<AdamState<Real>>(state_), c, lr);
          } else {
            novograd_step(params, std::get<NovoGradState<Real>>(state_), c, lr);
          }
        },
        config_);
  }

  std::size_t step_count() const {
    return std::visit([](const auto& s) { return s.step_count; }, state_);
  }

  /// Layer-wise second moments, when the algorithm keeps one scalar per layer.
  std::optional<std::vector<Real>> layer_second_moments() const {
    const auto* s = std::get_if<NovoGradState<Real>>(&state_);
    if (s == nullptr) return std::nullopt;
    std::vector<Real> v;
    v.reserve(s->layers.size());
    for (const auto& ls : s->layers) v.push_back(ls.v);
    return v;
  }

  const NovoGradState<Real>* novograd_state() const { return std::get_if<NovoGradState<Real>>(&state_); }

  json state_to_json() const {
    json j;
    j["format"] = kOptimizerStateFormat;
    j["version"] = kOptimizerStateVersion;
    j["config"] = to_json(config_);
    j["step_count"] = step_count();
    json layers = json::array();
    std::visit(
        [&](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, SgdMomentumState<Real>>) {
            for (const auto& ls : s.layers) layers.push_back({{"id", ls.id}, {"m", as_doubles(ls.m)}});
          } else if constexpr (std::is_same_v<S, AdamState<Real>>) {
            for (const auto& ls : s.layers)
              layers.push_back({{"id", ls.id}, {"m", as_doubles(ls.m)}, {"v", as_doubles(ls.v)}});
          } else if constexpr (std::is_same_v<S, NovoGradState<Real>>) {
            for (const auto& ls : s.layers) {
              json lj = {{"id", ls.id},
                         {"initialized", ls.initialized},
                         {"m", as_doubles(ls.m)},
                         {"v", static_cast<double>(ls.v)}};
              if (ls.v_hat) lj["v_hat"] = static_cast<double>(*ls.v_hat);
              layers.push_back(std::move(lj));
            }
          }
        },
        state_);
    j["layers"] = std::move(layers);
    return j;
  }

  /// Restores an optimizer from state_to_json() output. The layout must match
  /// `params` (same ids, same sizes, same order).
  static Optimizer from_json(const json& j, const ModelParams<Real>& params) {
    StrictObject root(j, "");
    const auto format = root.require<std::string>("format");
    if (format != kOptimizerStateFormat) throw Error("not an optimizer state document: '" + format + "'");
    const auto version = root.require<int>("version");
    if (version != kOptimizerStateVersion) throw Error("unsupported optimizer state version " + std::to_string(version));
    const json* cfg_json = root.child("config");
    if (cfg_json == nullptr) throw Error("missing key 'config'");
    Optimizer opt(optimizer_config_from_json(*cfg_json, "config"), params);
    const auto steps = root.require<std::size_t>("step_count");
    const json* layers = root.child("layers");
    if (layers == nullptr || !layers->is_array()) throw Error("key 'layers' must be an array");
    root.finish();

    std::visit(
        [&](auto& s) {
          using S = std::decay_t<decltype(s)>;
          s.step_count = steps;
          if constexpr (!std::is_same_v<S, StatelessState>) {
            if (layers->size() != s.layers.size()) throw Error("optimizer state has wrong number of layers");
            for (std::size_t l = 0; l < s.layers.size(); ++l) {
              StrictObject lo((*layers)[l], "layers[" + std::to_string(l) + "]");
              auto& ls = s.layers[l];
              if (lo.require<std::string>("id") != ls.id) throw Error("optimizer state layer order mismatch at '" + ls.id + "'");
              read_vector(lo, "m", ls.m);
              if constexpr (std::is_same_v<S, AdamState<Real>>) {
                read_vector(lo, "v", ls.v);
              } else if constexpr (std::is_same_v<S, NovoGradState<Real>>) {
                ls.initialized = lo.require<bool>("initialized");
                ls.v = static_cast<Real>(lo.require<double>("v"));
                if (ls.v_hat) ls.v_hat = static_cast<Real>(lo.require<double>("v_hat"));
              }
              lo.finish();
            }
          }
        },
        opt.state_);
    return opt;
  }

 private:
  struct StatelessState {
    std::size_t step_count = 0;
  };

  static std::vector<double> as_doubles(const std::vector<Real>& v) { return {v.begin(), v.end()}; }

  static void read_vector(StrictObject& obj, const std::string& key, std::vector<Real>& out) {
    const auto values = obj.require<std::vector<double>>(key);
    if (values.size() != out.size()) throw Error("key '" + obj.key_path(key) + "' has wrong length");
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = static_cast<Real>(values[i]);
  }

  OptimizerConfig config_;
  std::variant<StatelessState, SgdMomentumState<Real>, AdamState<Real>, NovoGradState<Real>> state_;
};

}  // namespace novograd
