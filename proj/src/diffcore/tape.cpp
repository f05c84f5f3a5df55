#include "tado/diffcore/tape.hpp"

#include "tado/errors.hpp"

namespace tado {

Var Tape::push(Node node) {
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) { return push(Node{std::move(value), std::nullopt, nullptr, false}); }

Var Tape::variable(Tensor value) { return push(Node{std::move(value), std::nullopt, nullptr, true}); }

void Tape::accumulate(const Var& target, const Tensor& grad) {
  Node& node = nodes_[target.id()];
  if (!node.requires_grad) return;
  if (node.grad) {
    *node.grad += grad;
  } else {
    require_same_shape(node.value, grad, "accumulate");
    node.grad = grad;
  }
}

void Tape::accumulate(const Var& target, Tensor&& grad) {
  Node& node = nodes_[target.id()];
  if (!node.requires_grad) return;
  if (node.grad) {
    *node.grad += grad;
  } else {
    require_same_shape(node.value, grad, "accumulate");
    node.grad = std::move(grad);
  }
}

Tensor* Tape::grad_buffer(const Var& target) {
  Node& node = nodes_[target.id()];
  if (!node.requires_grad) return nullptr;
  if (!node.grad) node.grad = Tensor::zeros_like(node.value);
  return &*node.grad;
}

void Tape::backward(const Var& output) {
  if (output.tape_ != this) throw ContractError("backward: variable belongs to another tape");
  if (nodes_[output.id()].value.size() != 1) {
    throw ContractError("backward: output must be scalar, got shape " +
                        shape_string(nodes_[output.id()].value.shape()));
  }
  for (Node& n : nodes_) n.grad.reset();
  if (!nodes_[output.id()].requires_grad) return;
  nodes_[output.id()].grad = Tensor(nodes_[output.id()].value.shape(), 1.0);
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.grad || !node.backward) continue;
    // Deque storage keeps this reference valid while the rule accumulates
    // into parents.
    node.backward(*this, *node.grad);
  }
}

Tensor Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id()];
  return node.grad ? *node.grad : Tensor::zeros_like(node.value);
}

}  // namespace tado
