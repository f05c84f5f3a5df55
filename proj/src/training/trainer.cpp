#include "tado/training/trainer.hpp"

#include <cmath>
#include <limits>

#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"
#include "tado/training/losses.hpp"

namespace tado::training {

namespace {

// Independent generator streams of one run. Parameter init, shuffling and
// phase (a) dropout do not depend on the variant, so variants that differ
// only in phase (b) or decoding share the theta1 trajectory.
enum Stream : std::uint64_t { kInit = 1, kShuffle = 2, kClassification = 3, kRegression = 4 };

std::vector<int> labels_of(Batch batch) {
  std::vector<int> labels;
  for (const Example* e : batch) labels.push_back(e->label);
  return labels;
}

std::vector<double> ratings_of(Batch batch) {
  std::vector<double> ratings;
  for (const Example* e : batch) ratings.push_back(e->rating);
  return ratings;
}

void require_batch(Batch batch) {
  if (batch.empty()) throw ContractError("training step on an empty batch");
}

std::vector<Tensor> leaf_gradients(const Tape& tape, const std::vector<Var>& vars) {
  std::vector<Tensor> grads;
  grads.reserve(vars.size());
  for (const Var& v : vars) grads.push_back(tape.grad(v));
  return grads;
}

template <class P>
std::vector<Var> bound_leaves(P& bound) {
  std::vector<Var> vars;
  visit_leaves(bound, "", [&](const std::string&, Var& v) { vars.push_back(v); });
  return vars;
}

Rng stream(std::uint64_t seed, Stream s) { return Rng(splitmix64(seed) ^ splitmix64(0xa5a5a5a5ULL + s)); }

}  // namespace

std::string_view selection_tag(Selection s) { return s == Selection::validation ? "validation" : "train"; }

Selection parse_selection(std::string_view tag) {
  if (tag == "validation") return Selection::validation;
  if (tag == "train") return Selection::train;
  throw ContractError("unknown selection rule '" + std::string(tag) + "'");
}

void validate(const TrainConfig& c) {
  if (c.epochs == 0) throw ContractError("epochs must be positive");
  if (c.batch_size == 0) throw ContractError("batch size must be positive");
  if (!(c.classifier_lr >= 0.0) || !(c.regression_lr >= 0.0)) throw ContractError("learning rates must be >= 0");
  if (!(c.classifier_l2 >= 0.0) || !(c.regression_l2 >= 0.0)) throw ContractError("L2 coefficients must be >= 0");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ContractError("dropout rate must lie in [0, 1)");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0)) {
    throw ContractError("validation fraction must lie in [0, 1)");
  }
}

std::vector<Example> prepare_examples(const data::InteractionDataset& dataset,
                                      std::span<const data::Interaction> interactions, const ModelConfig& config,
                                      bool exclude_target) {
  if (dataset.dim != config.dim) {
    throw ContractError("dataset dimension " + std::to_string(dataset.dim) + " does not match model dimension " +
                        std::to_string(config.dim));
  }
  std::vector<Example> out;
  out.reserve(interactions.size());
  for (const data::Interaction& x : interactions) {
    const double level = std::round(x.rating);
    if (level != x.rating || level < 1.0 || level > static_cast<double>(config.classes)) {
      throw ContractError("rating " + std::to_string(x.rating) + " is not a level in 1.." +
                          std::to_string(config.classes));
    }
    out.push_back(Example{data::build_histories(dataset, x, config.user_len, config.item_len, exclude_target),
                          x.rating, static_cast<int>(level)});
  }
  return out;
}

std::vector<Tensor*> classifier_parameters(Model& model) { return leaf_pointers(model.params.classifier); }

std::vector<Tensor*> regression_parameters(Model& model) { return {&model.params.w_reg}; }

double classification_phase(Model& model, Batch batch, OptimizerState& classifier_opt, double dropout,
                            Rng& dropout_rng) {
  require_batch(batch);
  Tape tape;
  auto bound = bind(tape, model.params.classifier, true);
  const DropoutSpec spec{dropout, &dropout_rng};
  std::vector<Var> logits;
  for (const Example* e : batch) logits.push_back(classifier_logits(tape, model.config, bound, e->histories, spec));
  const Var loss = ce_loss(logits, labels_of(batch));
  tape.backward(loss);
  const auto params = classifier_parameters(model);
  adam_step(classifier_opt, params, leaf_gradients(tape, bound_leaves(bound)));
  return loss.value().item();
}

double regression_phase(Model& model, Batch batch, OptimizerState& regression_opt, double dropout,
                        Rng& dropout_rng) {
  require_batch(batch);
  Tape tape;
  const auto frozen = bind(tape, model.params.classifier, false);
  const Var w_reg = tape.variable(model.params.w_reg);
  const DropoutSpec spec{dropout, &dropout_rng};
  std::vector<Var> ratings;
  for (const Example* e : batch) {
    ratings.push_back(
        rating_from_logits(model.config, classifier_logits(tape, model.config, frozen, e->histories, spec), w_reg));
  }
  const Var loss = mse_loss(ratings, ratings_of(batch));
  tape.backward(loss);
  const auto params = regression_parameters(model);
  adam_step(regression_opt, params, std::vector<Tensor>{tape.grad(w_reg)});
  return loss.value().item();
}

StepLosses dual_step(Model& model, Batch batch, OptimizerState& classifier_opt, OptimizerState& regression_opt,
                     double dropout, Rng& classification_rng, Rng& regression_rng) {
  StepLosses losses;
  losses.classification = classification_phase(model, batch, classifier_opt, dropout, classification_rng);
  losses.regression = regression_phase(model, batch, regression_opt, dropout, regression_rng);
  return losses;
}

double regression_only_step(Model& model, Batch batch, OptimizerState& optimizer, double dropout, Rng& dropout_rng) {
  require_batch(batch);
  Tape tape;
  auto bound = bind(tape, model.params, true);
  const DropoutSpec spec{dropout, &dropout_rng};
  std::vector<Var> ratings;
  for (const Example* e : batch) {
    ratings.push_back(rating_from_logits(
        model.config, classifier_logits(tape, model.config, bound.classifier, e->histories, spec), bound.w_reg));
  }
  const Var loss = mse_loss(ratings, ratings_of(batch));
  tape.backward(loss);
  const auto params = leaf_pointers(model.params);
  adam_step(optimizer, params, leaf_gradients(tape, bound_leaves(bound)));
  return loss.value().item();
}

StepLosses training_step(Model& model, Batch batch, OptimizerState& primary_opt, OptimizerState& regression_opt,
                         double dropout, Rng& classification_rng, Rng& regression_rng) {
  switch (model.config.variant) {
    case Variant::regression_only:
      return {std::nullopt, regression_only_step(model, batch, primary_opt, dropout, classification_rng)};
    case Variant::no_weight_learning:
      return {classification_phase(model, batch, primary_opt, dropout, classification_rng), std::nullopt};
    default:
      return dual_step(model, batch, primary_opt, regression_opt, dropout, classification_rng, regression_rng);
  }
}

std::pair<OptimizerState, OptimizerState> make_optimizers(Model& model, const TrainConfig& config) {
  const auto theta2 = regression_parameters(model);
  OptimizerState regression = make_optimizer(config.regression_optimizer(), theta2);
  if (model.config.variant == Variant::regression_only) {
    const auto all = leaf_pointers(model.params);
    return {make_optimizer(config.regression_optimizer(), all), std::move(regression)};
  }
  const auto theta1 = classifier_parameters(model);
  return {make_optimizer(config.classifier_optimizer(), theta1), std::move(regression)};
}

double examples_mse(const Model& model, std::span<const Example> examples) {
  if (examples.empty()) throw ContractError("MSE over an empty set");
  const std::vector<double> predictions =
      predict_ratings(model, examples.size(), [&](std::size_t i) -> const data::HistoryPair& {
        return examples[i].histories;
      });
  double total = 0.0;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const double d = predictions[i] - examples[i].rating;
    total += d * d;
  }
  return total / static_cast<double>(examples.size());
}

TrainResult train(const TrainConfig& config, const data::InteractionDataset& dataset) {
  validate(config);
  if (dataset.train.empty()) throw ContractError("train: the training split is empty");

  const std::size_t held_out = static_cast<std::size_t>(
      std::floor(config.validation_fraction * static_cast<double>(dataset.train.size())));
  const std::size_t validation_size =
      config.selection == Selection::validation && held_out < dataset.train.size() ? held_out : 0;
  const std::span<const data::Interaction> all(dataset.train);
  const std::vector<Example> fit =
      prepare_examples(dataset, all.first(all.size() - validation_size), config.model, config.exclude_target);
  const std::vector<Example> validation =
      prepare_examples(dataset, all.last(validation_size), config.model, config.exclude_target);

  TrainResult result;
  result.initial = init_model(config.model, stream(config.seed, kInit).next());
  result.fit_size = fit.size();
  result.validation_size = validation.size();
  Model model = result.initial;
  auto [primary_opt, regression_opt] = make_optimizers(model, config);
  Rng shuffle_rng = stream(config.seed, kShuffle);
  Rng classification_rng = stream(config.seed, kClassification);
  Rng regression_rng = stream(config.seed, kRegression);

  std::vector<const Example*> order(fit.size());
  for (std::size_t i = 0; i < fit.size(); ++i) order[i] = &fit[i];

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span<const Example*>(order));
    double ce_total = 0.0, mse_total = 0.0;
    std::size_t ce_batches = 0, mse_batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      const std::size_t size = std::min(config.batch_size, order.size() - begin);
      const StepLosses losses = training_step(model, Batch(order).subspan(begin, size), primary_opt, regression_opt,
                                              config.dropout, classification_rng, regression_rng);
      if (losses.classification) ce_total += *losses.classification, ++ce_batches;
      if (losses.regression) mse_total += *losses.regression, ++mse_batches;
    }
    EpochRecord record;
    record.epoch = epoch;
    if (ce_batches) record.classification_loss = ce_total / static_cast<double>(ce_batches);
    if (mse_batches) record.regression_loss = mse_total / static_cast<double>(mse_batches);
    record.train_mse = examples_mse(model, fit);
    if (!validation.empty()) record.validation_mse = examples_mse(model, validation);
    result.history.push_back(record);

    const double metric = record.validation_mse.value_or(record.train_mse);
    if (metric < best || result.selected_epoch == 0) {
      best = metric;
      result.selected_epoch = epoch;
      result.model = model;
    }
  }
  return result;
}

}  // namespace tado::training
