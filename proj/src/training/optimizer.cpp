#include "tado/training/optimizer.hpp"

#include <cmath>

#include "tado/errors.hpp"

namespace tado::training {

OptimizerState make_optimizer(const AdamConfig& config, std::span<Tensor* const> params) {
  if (!(config.learning_rate >= 0.0) || !(config.l2 >= 0.0)) {
    throw ContractError("learning rate and L2 coefficient must be non-negative");
  }
  OptimizerState state{config, 0, {}, {}};
  for (const Tensor* p : params) {
    state.first.push_back(Tensor::zeros_like(*p));
    state.second.push_back(Tensor::zeros_like(*p));
  }
  return state;
}

void adam_step(OptimizerState& state, std::span<Tensor* const> params, std::span<const Tensor> grads) {
  if (params.size() != grads.size() || params.size() != state.first.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) + " parameters, " +
                     std::to_string(grads.size()) + " gradients, " + std::to_string(state.first.size()) +
                     " moment slots");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    require_same_shape(*params[i], grads[i], "adam_step");
    require_same_shape(*params[i], state.first[i], "adam_step");
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i]->data();
    const auto g = grads[i].data();
    auto m = state.first[i].data();
    auto v = state.second[i].data();
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double grad = g[j] + c.l2 * p[j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * grad;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * grad * grad;
      const double m_hat = m[j] / correction1;
      const double v_hat = v[j] / correction2;
      p[j] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace tado::training
