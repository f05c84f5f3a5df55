#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tado/diffcore/tensor.hpp"

namespace tado::training {

struct AdamConfig {
  double learning_rate = 1e-3;
  /// Added to the gradient as l2 * param before the moment updates.
  double l2 = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> first;   // m
  std::vector<Tensor> second;  // v
};

/// Zero moments shaped like `params`.
OptimizerState make_optimizer(const AdamConfig& config, std::span<Tensor* const> params);

/// One bias-corrected Adam update of every parameter, in place.
void adam_step(OptimizerState& state, std::span<Tensor* const> params, std::span<const Tensor> grads);

}  // namespace tado::training
