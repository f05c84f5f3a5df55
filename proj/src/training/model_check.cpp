#include "tado/training/model_check.hpp"

#include <algorithm>
#include <vector>

#include "tado/diffcore/param_tree.hpp"
#include "tado/training/losses.hpp"

namespace tado::training {

namespace {

data::EmbeddedHistory random_history(Rng& rng, std::size_t rows, std::size_t dim) {
  data::EmbeddedHistory h{Tensor({rows, dim}), 1 + rng.below(rows)};
  for (std::size_t i = 0; i < h.length * dim; ++i) h.matrix[i] = rng.uniform(-1.0, 1.0);
  return h;
}

}  // namespace

ModelConfig tiny_model_config() {
  ModelConfig c;
  c.dim = 8;
  c.hidden = 8;
  c.classes = 5;
  c.user_len = 4;
  c.item_len = 4;
  return c;
}

double ModelGradCheck::max_relative_error() const {
  return std::max(classification.max_relative_error, regression.max_relative_error);
}

ModelGradCheck check_model_gradients(const ModelConfig& config, std::uint64_t seed, std::size_t batch) {
  const Model model = init_model(config, seed);
  Rng rng(seed ^ 0x6772616463686b00ULL);
  std::vector<data::HistoryPair> histories;
  std::vector<int> labels;
  std::vector<double> ratings;
  for (std::size_t b = 0; b < batch; ++b) {
    histories.push_back({random_history(rng, config.user_len, config.dim),
                         random_history(rng, config.item_len, config.dim)});
    labels.push_back(1 + static_cast<int>(rng.below(config.classes)));
    ratings.push_back(static_cast<double>(labels.back()));
  }
  const std::vector<Tensor> values = leaf_values(model.params);
  const DropoutSpec off = DropoutSpec::eval();

  auto forward = [&](Tape& tape, std::span<const Var> vars, bool regression) {
    const ModelParams<Var> p = rebind(model.params, vars);
    std::vector<Var> outputs;
    for (const data::HistoryPair& h : histories) {
      const Var logits = classifier_logits(tape, config, p.classifier, h, off);
      outputs.push_back(regression ? rating_from_logits(config, logits, p.w_reg) : logits);
    }
    return regression ? mse_loss(outputs, ratings) : ce_loss(outputs, labels);
  };

  ModelGradCheck out;
  out.parameters = scalar_count(model.params);
  out.classification = grad_check([&](Tape& t, std::span<const Var> v) { return forward(t, v, false); }, values);
  out.regression = grad_check([&](Tape& t, std::span<const Var> v) { return forward(t, v, true); }, values);
  return out;
}

}  // namespace tado::training
