#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tado/diffcore/tape.hpp"

namespace tado::prediction {

/// Class probabilities; entry c-1 is the probability of rating level c.
struct RatingDistribution {
  std::vector<double> probs;

  std::size_t classes() const { return probs.size(); }
};

/// softmax(z)
Var classify(Var z);
RatingDistribution classify(std::span<const double> z);

/// 1 + (C - 1) * sigmoid(<w_reg, probs>)
Var project_rating(Var probs, Var w_reg);
double project_rating(const RatingDistribution& dist, std::span<const double> w_reg);

/// Sum over c of c * p(c).
double expected_rating(const RatingDistribution& dist);
/// Level with the largest probability; ties go to the lower level.
double argmax_rating(const RatingDistribution& dist);

/// Evenly spaced from -2 to 2; (-2, -1, 0, 1, 2) for five classes.
Tensor initial_regression_weights(std::size_t classes);

}  // namespace tado::prediction
