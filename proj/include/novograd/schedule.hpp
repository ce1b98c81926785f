#pragma once

// Learning-rate schedules and layer-wise adaptive rate clipping (LARC).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <string_view>

#include "novograd/error.hpp"

namespace novograd {

enum class ScheduleFamily { constant, cosine, polynomial };

inline std::string_view to_string(ScheduleFamily f) {
  switch (f) {
    case ScheduleFamily::constant: return "constant";
    case ScheduleFamily::cosine: return "cosine";
    case ScheduleFamily::polynomial: return "polynomial";
  }
  return "?";
}

inline ScheduleFamily schedule_family_from_string(std::string_view s) {
  if (s == "constant") return ScheduleFamily::constant;
  if (s == "cosine") return ScheduleFamily::cosine;
  if (s == "polynomial") return ScheduleFamily::polynomial;
  throw Error("unknown schedule family '" + std::string(s) + "'");
}

/// Linear warmup for `warmup_steps` steps, then decay from base_lr to min_lr
/// over the remaining steps. Quadratic decay is `polynomial` with power 2.
struct ScheduleSpec {
  double base_lr = 0.01;
  std::size_t total_steps = 1;
  ScheduleFamily family = ScheduleFamily::constant;
  double power = 2.0;
  std::size_t warmup_steps = 0;
  double min_lr = 0.0;

  void validate() const {
    if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw Error("base_lr must be finite and > 0");
    if (total_steps == 0) throw Error("total_steps must be > 0");
    if (!(power > 0.0) || !std::isfinite(power)) throw Error("power must be finite and > 0");
    if (warmup_steps >= total_steps) throw Error("warmup_steps must be < total_steps");
    if (!(min_lr >= 0.0) || min_lr > base_lr) throw Error("min_lr must be in [0, base_lr]");
  }

  friend bool operator==(const ScheduleSpec&, const ScheduleSpec&) = default;
};

/// Learning rate at step t, 0 <= t <= total_steps.
inline double lr_at(const ScheduleSpec& spec, std::size_t t) {
  spec.validate();
  if (t > spec.total_steps) throw Error("schedule exhausted");

  if (t < spec.warmup_steps) {
    const double ramp =
        spec.base_lr * static_cast<double>(t + 1) / static_cast<double>(spec.warmup_steps);
    return std::clamp(ramp, spec.min_lr, spec.base_lr);
  }

  const double s = static_cast<double>(t - spec.warmup_steps);
  const double span = static_cast<double>(spec.total_steps - spec.warmup_steps);
  const double frac = s / span;
  const double range = spec.base_lr - spec.min_lr;
  switch (spec.family) {
    case ScheduleFamily::constant: return spec.base_lr;
    case ScheduleFamily::cosine:
      return spec.min_lr + range * 0.5 * (1.0 + std::cos(std::numbers::pi * frac));
    case ScheduleFamily::polynomial: return spec.min_lr + range * std::pow(1.0 - frac, spec.power);
  }
  return spec.base_lr;
}

struct LarcConfig {
  double trust_coefficient = 0.001;
  bool clip = true;
  double eps_div = 1e-8;

  void validate() const {
    if (!(trust_coefficient > 0.0) || !std::isfinite(trust_coefficient))
      throw Error("trust_coefficient must be finite and > 0");
    if (!(eps_div >= 0.0) || !std::isfinite(eps_div)) throw Error("eps_div must be finite and >= 0");
  }

  friend bool operator==(const LarcConfig&, const LarcConfig&) = default;
};

/// Multiplier for a layer's gradient so that the layer's effective rate is
/// min(lr, trust * ||w|| / ||g||) (clip) or the trust ratio itself (no clip).
inline double larc_scale(double weights_norm, double grad_norm, double lr, const LarcConfig& cfg) {
  cfg.validate();
  if (weights_norm < 0.0 || grad_norm < 0.0 || lr < 0.0) throw Error("larc_scale: negative input");
  if (weights_norm == 0.0 || lr == 0.0) return 1.0;
  const double denom = grad_norm + cfg.eps_div;
  if (denom == 0.0) return 1.0;
  const double trust = cfg.trust_coefficient * weights_norm / denom;
  const double effective = cfg.clip ? std::min(lr, trust) : trust;
  return effective / lr;
}

}  // namespace novograd
