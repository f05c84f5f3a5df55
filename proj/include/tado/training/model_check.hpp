#pragma once

#include <cstddef>
#include <cstdint>

#include "tado/diffcore/grad_check.hpp"
#include "tado/training/model.hpp"

namespace tado::training {

/// Shape of the model used by gradcheck: |V|=8, r=5, h=8, C=5, n=k=4.
ModelConfig tiny_model_config();

struct ModelGradCheck {
  GradCheckResult classification;  // ce_loss over every parameter
  GradCheckResult regression;      // mse_loss over every parameter
  std::size_t parameters = 0;

  double max_relative_error() const;
};

/// Central-difference check of both losses of a freshly initialised model
/// on a random batch, with dropout off.
ModelGradCheck check_model_gradients(const ModelConfig& config, std::uint64_t seed, std::size_t batch = 3);

}  // namespace tado::training
