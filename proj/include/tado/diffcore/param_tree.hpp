#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "tado/diffcore/tape.hpp"
#include "tado/diffcore/tensor.hpp"

// Parameter structs are templated on their leaf type (Tensor for stored
// values, Var for values bound to a tape, Tensor again for gradients) and
// expose `tie()` plus a static `names` array listing fields in registration
// order. The helpers below walk such trees generically; optional members
// and vectors of sub-structs are supported.

namespace tado {

namespace detail {

template <class T>
struct is_optional : std::false_type {};
template <class T>
struct is_optional<std::optional<T>> : std::true_type {};

template <class T>
struct is_sequence : std::false_type {};
template <class T>
struct is_sequence<std::vector<T>> : std::true_type {};
template <class T, std::size_t N>
struct is_sequence<std::array<T, N>> : std::true_type {};

template <class T>
struct is_vector : std::false_type {};
template <class T>
struct is_vector<std::vector<T>> : std::true_type {};

template <class T>
constexpr bool is_leaf_v = std::is_same_v<T, Tensor> || std::is_same_v<T, Var>;

inline std::string join_name(const std::string& prefix, std::string_view name) {
  return prefix.empty() ? std::string(name) : prefix + "." + std::string(name);
}

}  // namespace detail

/// Calls f(name, leaf) for every leaf in registration order.
template <class P, class F>
void visit_leaves(P& node, const std::string& prefix, F&& f) {
  using U = std::remove_const_t<P>;
  if constexpr (detail::is_leaf_v<U>) {
    f(prefix, node);
  } else if constexpr (detail::is_optional<U>::value) {
    if (node) visit_leaves(*node, prefix, f);
  } else if constexpr (detail::is_sequence<U>::value) {
    for (std::size_t i = 0; i < node.size(); ++i) visit_leaves(node[i], detail::join_name(prefix, std::to_string(i)), f);
  } else {
    auto fields = node.tie();
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      (visit_leaves(std::get<I>(fields), detail::join_name(prefix, U::names[I]), f), ...);
    }(std::make_index_sequence<std::tuple_size_v<decltype(fields)>>{});
  }
}

/// Walks two trees of identical structure in lockstep, calling f(a_leaf,
/// b_leaf). Optionals and vectors in `b` are resized to mirror `a`.
template <class A, class B, class F>
void zip_leaves(A& a, B& b, F&& f) {
  using UA = std::remove_const_t<A>;
  if constexpr (detail::is_leaf_v<UA>) {
    f(a, b);
  } else if constexpr (detail::is_optional<UA>::value) {
    if (a) {
      if (!b) b.emplace();
      zip_leaves(*a, *b, f);
    } else {
      b.reset();
    }
  } else if constexpr (detail::is_sequence<UA>::value) {
    if constexpr (detail::is_vector<std::remove_const_t<B>>::value) b.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) zip_leaves(a[i], b[i], f);
  } else {
    auto fa = a.tie();
    auto fb = b.tie();
    [&]<std::size_t... I>(std::index_sequence<I...>) {
      (zip_leaves(std::get<I>(fa), std::get<I>(fb), f), ...);
    }(std::make_index_sequence<std::tuple_size_v<decltype(fa)>>{});
  }
}

/// Records every stored tensor on the tape, as a variable when trainable.
template <template <class> class S>
S<Var> bind(Tape& tape, const S<Tensor>& params, bool trainable) {
  S<Var> bound;
  zip_leaves(params, bound, [&](const Tensor& t, Var& v) { v = trainable ? tape.variable(t) : tape.constant(t); });
  return bound;
}

/// Gradients of the last backward pass, shaped like the bound tree.
template <template <class> class S>
S<Tensor> gradients(const Tape& tape, const S<Var>& bound) {
  S<Tensor> grads;
  zip_leaves(bound, grads, [&](const Var& v, Tensor& g) { g = tape.grad(v); });
  return grads;
}

template <class P>
std::vector<Tensor*> leaf_pointers(P& params) {
  std::vector<Tensor*> out;
  visit_leaves(params, "", [&](const std::string&, Tensor& t) { out.push_back(&t); });
  return out;
}

/// Copies of every leaf in registration order.
template <class P>
std::vector<Tensor> leaf_values(const P& params) {
  std::vector<Tensor> out;
  visit_leaves(params, "", [&](const std::string&, const Tensor& t) { out.push_back(t); });
  return out;
}

/// Builds a bound tree shaped like `layout` whose leaves are taken from
/// `vars` in registration order.
template <template <class> class S>
S<Var> rebind(const S<Tensor>& layout, std::span<const Var> vars) {
  S<Var> bound;
  std::size_t next = 0;
  zip_leaves(layout, bound, [&](const Tensor&, Var& v) { v = vars[next++]; });
  return bound;
}

template <class P>
std::size_t scalar_count(const P& params) {
  std::size_t n = 0;
  visit_leaves(params, "", [&](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

}  // namespace tado
