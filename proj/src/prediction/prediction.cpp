#include "tado/prediction/prediction.hpp"

#include <cmath>

#include "tado/diffcore/ops.hpp"
#include "tado/errors.hpp"

namespace tado::prediction {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Var classify(Var z) { return softmax(z); }

RatingDistribution classify(std::span<const double> z) {
  Tape tape;
  const Var p = softmax(tape.constant(Tensor::vector({z.begin(), z.end()})));
  const auto values = p.value().data();
  return RatingDistribution{{values.begin(), values.end()}};
}

Var project_rating(Var probs, Var w_reg) {
  require_rank(probs.value(), 1, "project_rating");
  require_same_shape(probs.value(), w_reg.value(), "project_rating");
  const double span = static_cast<double>(probs.value().size()) - 1.0;
  return add_scalar(scale(sigmoid(dot(w_reg, probs)), span), 1.0);
}

double project_rating(const RatingDistribution& dist, std::span<const double> w_reg) {
  if (w_reg.size() != dist.classes()) throw ShapeError("project_rating: w_reg length must equal the class count");
  double inner = 0.0;
  for (std::size_t c = 0; c < w_reg.size(); ++c) inner += w_reg[c] * dist.probs[c];
  return 1.0 + (static_cast<double>(dist.classes()) - 1.0) * stable_sigmoid(inner);
}

double expected_rating(const RatingDistribution& dist) {
  double total = 0.0;
  for (std::size_t c = 0; c < dist.classes(); ++c) total += static_cast<double>(c + 1) * dist.probs[c];
  return total;
}

double argmax_rating(const RatingDistribution& dist) {
  if (dist.probs.empty()) throw ContractError("argmax_rating: empty distribution");
  std::size_t best = 0;
  for (std::size_t c = 1; c < dist.classes(); ++c) {
    if (dist.probs[c] > dist.probs[best]) best = c;
  }
  return static_cast<double>(best + 1);
}

Tensor initial_regression_weights(std::size_t classes) {
  if (classes < 2) throw ContractError("at least two rating classes are required");
  Tensor w(Shape{classes});
  for (std::size_t c = 0; c < classes; ++c) w[c] = -2.0 + 4.0 * static_cast<double>(c) / static_cast<double>(classes - 1);
  return w;
}

}  // namespace tado::prediction
