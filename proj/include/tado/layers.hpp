#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <tuple>

#include "tado/diffcore/ops.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/rng.hpp"

namespace tado {

/// weight * x + bias. For a matrix input the weight multiplies from the left.
template <class T = Tensor>
struct AffineParams {
  T weight;
  T bias;

  auto tie() { return std::tie(weight, bias); }
  auto tie() const { return std::tie(weight, bias); }
  static constexpr std::array<std::string_view, 2> names{"weight", "bias"};
};

Var affine(const AffineParams<Var>& p, Var x);

/// Glorot-uniform weight of shape (out x in) and a zero bias of `bias_shape`.
AffineParams<> init_affine(std::size_t out, std::size_t in, Shape bias_shape, Rng& rng);
Tensor glorot_uniform(std::size_t out, std::size_t in, Rng& rng);
Tensor uniform_tensor(Shape shape, double bound, Rng& rng);

/// Training-mode dropout when `rng` is set and `rate` > 0; identity otherwise.
struct DropoutSpec {
  double rate = 0.0;
  Rng* rng = nullptr;

  static DropoutSpec eval() { return {}; }
  Var apply(Var x) const { return rng && rate > 0.0 ? dropout(x, rate, *rng) : x; }
};

/// Runs `f` on a scratch tape whose inputs are all constants.
template <class F>
auto on_scratch_tape(F&& f) {
  Tape tape;
  return f(tape);
}

}  // namespace tado
