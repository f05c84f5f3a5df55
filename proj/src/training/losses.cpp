#include "tado/training/losses.hpp"

#include <cmath>
#include <string>

#include "tado/diffcore/ops.hpp"
#include "tado/errors.hpp"

namespace tado::training {

namespace {

void require_batch(std::size_t a, std::size_t b, const char* what) {
  if (a == 0) throw ContractError(std::string(what) + ": empty batch");
  if (a != b) throw ContractError(std::string(what) + ": " + std::to_string(a) + " predictions for " +
                                  std::to_string(b) + " targets");
}

std::size_t label_index(int label, std::size_t classes) {
  if (label < 1 || static_cast<std::size_t>(label) > classes) {
    throw ContractError("label " + std::to_string(label) + " outside 1.." + std::to_string(classes));
  }
  return static_cast<std::size_t>(label - 1);
}

}  // namespace

double ce_loss(std::span<const prediction::RatingDistribution> distributions, std::span<const int> labels) {
  require_batch(distributions.size(), labels.size(), "ce_loss");
  double total = 0.0;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    total -= std::log(distributions[b].probs[label_index(labels[b], distributions[b].classes())]);
  }
  return total / static_cast<double>(labels.size());
}

double mse_loss(std::span<const double> predictions, std::span<const double> ratings) {
  require_batch(predictions.size(), ratings.size(), "mse_loss");
  double total = 0.0;
  for (std::size_t b = 0; b < ratings.size(); ++b) {
    const double d = predictions[b] - ratings[b];
    total += d * d;
  }
  return total / static_cast<double>(ratings.size());
}

Var ce_loss(std::span<const Var> logits, std::span<const int> labels) {
  require_batch(logits.size(), labels.size(), "ce_loss");
  Var total;
  for (std::size_t b = 0; b < labels.size(); ++b) {
    const Var term = pick(log_softmax(logits[b]), label_index(labels[b], logits[b].value().size()));
    total = b == 0 ? term : add(total, term);
  }
  return scale(total, -1.0 / static_cast<double>(labels.size()));
}

Var mse_loss(std::span<const Var> predictions, std::span<const double> ratings) {
  require_batch(predictions.size(), ratings.size(), "mse_loss");
  Var total;
  for (std::size_t b = 0; b < ratings.size(); ++b) {
    const Var term = square(add_scalar(predictions[b], -ratings[b]));
    total = b == 0 ? term : add(total, term);
  }
  return scale(total, 1.0 / static_cast<double>(ratings.size()));
}

}  // namespace tado::training
