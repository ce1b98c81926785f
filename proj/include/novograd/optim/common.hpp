#pragma once

#include <cmath>
#include <span>
#include <string>

#include "novograd/error.hpp"
#include "novograd/param.hpp"

namespace novograd::optim {

inline void check_lr(double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw Error("learning rate must be finite and >= 0");
}

/// Rejects the whole step before any layer is touched, so a failed step
/// leaves params and state unchanged.
template <typename Real>
void check_finite_grads(const ModelParams<Real>& params) {
  for (const auto& layer : params) {
    for (const Real g : layer.grad()) {
      if (!std::isfinite(g)) throw Error("non-finite gradient in layer '" + layer.id() + "'");
    }
  }
}

inline void check_unit_interval(double value, const char* name, bool allow_one) {
  const bool ok = value >= 0.0 && (allow_one ? value <= 1.0 : value < 1.0);
  if (!ok) throw Error(std::string(name) + (allow_one ? " must be in [0, 1]" : " must be in [0, 1)"));
}

inline void check_non_negative(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value)) throw Error(std::string(name) + " must be finite and >= 0");
}

}  // namespace novograd::optim
