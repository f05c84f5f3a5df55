#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "tado/diffcore/tape.hpp"
#include "tado/diffcore/tensor.hpp"

namespace tado {

/// Builds a scalar on `tape` from the given parameter handles.
using ScalarFn = std::function<Var(Tape& tape, std::span<const Var> params)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t worst_entry = 0;
  std::size_t entries_checked = 0;
};

/// Compares reverse-mode gradients of `fn` against central differences
/// over every entry of every parameter. The error of one entry is
/// |analytic - numeric| / max(1, |numeric|). `eps` must lie in [1e-7, 1e-3].
GradCheckResult grad_check(const ScalarFn& fn, std::span<const Tensor> params, double eps = 1e-6);

}  // namespace tado
