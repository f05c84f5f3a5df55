#pragma once

#include <span>

#include "tado/diffcore/tape.hpp"
#include "tado/prediction/prediction.hpp"

namespace tado::training {

/// Mean negative log-likelihood of the true levels (1..C).
double ce_loss(std::span<const prediction::RatingDistribution> distributions, std::span<const int> labels);
double mse_loss(std::span<const double> predictions, std::span<const double> ratings);

/// Same as ce_loss, from logits through log_softmax.
Var ce_loss(std::span<const Var> logits, std::span<const int> labels);
Var mse_loss(std::span<const Var> predictions, std::span<const double> ratings);

}  // namespace tado::training
