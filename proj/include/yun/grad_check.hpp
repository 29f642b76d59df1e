#pragma once

#include <functional>
#include <span>

#include "yun/autodiff.hpp"

namespace yun {

/// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t coordinates = 0;
  std::string worst;  // "param[index]" of the worst coordinate, with both estimates
};

/// Compares analytic gradients against central differences for every
/// coordinate of every parameter. Relative error per coordinate is
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|).
/// Throws UsageError if two evaluations at the same point differ.
GradCheckResult grad_check_detailed(const LossFn& fn, std::span<Parameter* const> params, double step);

inline double grad_check(const LossFn& fn, std::span<Parameter* const> params, double step) {
  return grad_check_detailed(fn, params, step).max_relative_error;
}

}  // namespace yun
