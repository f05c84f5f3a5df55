#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <tuple>
#include <utility>

#include "tado/diffcore/tape.hpp"
#include "tado/layers.hpp"

namespace tado::attention {

/// User and item affine maps (r x r weight, r x |V| bias). Without an item
/// map both streams use the user map.
template <class T = Tensor>
struct ProjectionParams {
  AffineParams<T> user;
  std::optional<AffineParams<T>> item;

  bool shared() const { return !item.has_value(); }
  const AffineParams<T>& item_map() const { return item ? *item : user; }

  auto tie() { return std::tie(user, item); }
  auto tie() const { return std::tie(user, item); }
  static constexpr std::array<std::string_view, 2> names{"user", "item"};
};

struct CoAttentionVars {
  Var q, k;          // r x |V|
  Var affinity;      // r x r
  Var user_weights;  // M_u
  Var item_weights;  // M_i
  Var user_context;  // Z_u
  Var item_context;  // Z_i
};

struct CoAttentionState {
  Tensor q, k;
  Tensor affinity;
  Tensor user_weights;
  Tensor item_weights;
  Tensor user_context;
  Tensor item_context;
};

std::pair<Var, Var> project_qk(Var f_u, Var f_i, const ProjectionParams<Var>& params);
/// tanh(K Q^T)
Var affinity(Var q, Var k);
/// (softmax_rows(M), softmax_rows(M^T))
std::pair<Var, Var> attention_weights(Var m);
/// (M_u Q, M_i K)
std::pair<Var, Var> contextualize(Var m_u, Var m_i, Var q, Var k);
CoAttentionVars co_attention(Var f_u, Var f_i, const ProjectionParams<Var>& params);

std::pair<Tensor, Tensor> project_qk(const Tensor& f_u, const Tensor& f_i, const ProjectionParams<>& params);
Tensor affinity(const Tensor& q, const Tensor& k);
std::pair<Tensor, Tensor> attention_weights(const Tensor& m);
std::pair<Tensor, Tensor> contextualize(const Tensor& m_u, const Tensor& m_i, const Tensor& q, const Tensor& k);
CoAttentionState co_attention(const Tensor& f_u, const Tensor& f_i, const ProjectionParams<>& params);

ProjectionParams<> init_projection(std::size_t rows, std::size_t dim, bool shared, Rng& rng);

}  // namespace tado::attention
