#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <tuple>

#include "tado/diffcore/tape.hpp"
#include "tado/layers.hpp"

namespace tado::interaction {

/// output(relu(hidden(x))) + skip * x
template <class T = Tensor>
struct MlpParams {
  AffineParams<T> hidden;
  AffineParams<T> output;
  T skip;  // (out x in)

  auto tie() { return std::tie(hidden, output, skip); }
  auto tie() const { return std::tie(hidden, output, skip); }
  static constexpr std::array<std::string_view, 3> names{"hidden", "output", "skip"};
};

template <class T = Tensor>
struct InteractionParams {
  MlpParams<T> user_fusion;  // 2 r |V| -> h
  MlpParams<T> item_fusion;  // 2 r |V| -> h
  MlpParams<T> output;       // 2 r |V| + h -> C

  auto tie() { return std::tie(user_fusion, item_fusion, output); }
  auto tie() const { return std::tie(user_fusion, item_fusion, output); }
  static constexpr std::array<std::string_view, 3> names{"user_fusion", "item_fusion", "output"};
};

Var mlp(const MlpParams<Var>& params, Var x);

/// MLP_u(flat f_u ++ flat Z_u) * MLP_i(flat f_i ++ flat Z_i)
Var fuse(Var f_u, Var z_u, Var f_i, Var z_i, const InteractionParams<Var>& params);

/// MLP_out(dropout(flat Z_u ++ flat Z_i ++ S_ui))
Var interaction_vector(Var z_u, Var z_i, Var s_ui, const InteractionParams<Var>& params, const DropoutSpec& dropout);

/// Head used when the interaction component is ablated: one affine layer on
/// dropout(flat Z_u ++ flat Z_i).
Var direct_vector(Var z_u, Var z_i, const AffineParams<Var>& head, const DropoutSpec& dropout);

Tensor fuse(const Tensor& f_u, const Tensor& z_u, const Tensor& f_i, const Tensor& z_i,
            const InteractionParams<>& params);
Tensor interaction_vector(const Tensor& z_u, const Tensor& z_i, const Tensor& s_ui, const InteractionParams<>& params);

MlpParams<> init_mlp(std::size_t in, std::size_t hidden, std::size_t out, Rng& rng);
InteractionParams<> init_interaction(std::size_t rows, std::size_t dim, std::size_t hidden, std::size_t classes,
                                     Rng& rng);

}  // namespace tado::interaction
