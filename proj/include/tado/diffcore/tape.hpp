#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <optional>
#include <vector>

#include "tado/diffcore/tensor.hpp"

namespace tado {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// tape lives.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Record of primitive applications for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order. A node requires a gradient when
/// it is a variable or when any of its parents does; backward rules are
/// stored only for such nodes, so evaluating with constant parameters costs
/// no more than a plain forward pass. A tape serves one backward pass.
class Tape {
 public:
  /// Receives the gradient flowing into the node and pushes contributions
  /// to its parents through `accumulate`.
  using Backward = std::function<void(Tape&, const Tensor&)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);
  /// The rule is type-erased and kept only when some parent requires a
  /// gradient.
  template <class F>
  Var record(Tensor value, std::initializer_list<Var> parents, F&& backward) {
    const bool needs = any_requires_grad(parents.begin(), parents.end());
    return push(Node{std::move(value), std::nullopt, needs ? Backward(std::forward<F>(backward)) : nullptr, needs});
  }
  template <class F>
  Var record(Tensor value, const std::vector<Var>& parents, F&& backward) {
    const bool needs = any_requires_grad(parents.data(), parents.data() + parents.size());
    return push(Node{std::move(value), std::nullopt, needs ? Backward(std::forward<F>(backward)) : nullptr, needs});
  }

  const Tensor& value(const Var& v) const { return nodes_[v.id()].value; }
  bool requires_grad(const Var& v) const { return nodes_[v.id()].requires_grad; }

  /// Adds `grad` into the gradient of `target`; ignored for constants.
  void accumulate(const Var& target, const Tensor& grad);
  void accumulate(const Var& target, Tensor&& grad);
  /// Zero-initialised gradient slot of `target` for in-place accumulation;
  /// null for constants.
  Tensor* grad_buffer(const Var& target);

  /// Propagates from a single-element output back through every node.
  void backward(const Var& output);

  /// Gradient of the last backward output with respect to `v`; zeros when
  /// no gradient reached it.
  Tensor grad(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    std::optional<Tensor> grad;
    Backward backward;
    bool requires_grad = false;
  };

  Var push(Node node);
  bool any_requires_grad(const Var* begin, const Var* end) const {
    for (const Var* v = begin; v != end; ++v) {
      if (nodes_[v->id()].requires_grad) return true;
    }
    return false;
  }

  std::deque<Node> nodes_;
};

inline const Tensor& Var::value() const { return tape_->value(*this); }
inline bool Var::requires_grad() const { return tape_->requires_grad(*this); }

}  // namespace tado
