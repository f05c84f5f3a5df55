#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tado/data/dataset.hpp"
#include "tado/training/model.hpp"
#include "tado/training/optimizer.hpp"

namespace tado::training {

/// Which metric picks the retained epoch snapshot.
enum class Selection { validation, train };

std::string_view selection_tag(Selection s);
Selection parse_selection(std::string_view tag);

struct TrainConfig {
  ModelConfig model;
  std::size_t epochs = 10;
  std::size_t batch_size = 64;
  double classifier_lr = 4e-4;
  double regression_lr = 1e-3;
  double classifier_l2 = 1e-3;
  double regression_l2 = 0.0;
  double dropout = 0.2;
  std::uint64_t seed = 1;
  Selection selection = Selection::validation;
  /// Most recent share of the training interactions held out for selection.
  double validation_fraction = 0.1;
  bool exclude_target = true;

  AdamConfig classifier_optimizer() const { return {classifier_lr, classifier_l2}; }
  AdamConfig regression_optimizer() const { return {regression_lr, regression_l2}; }
};

/// Throws ContractError on out-of-range settings.
void validate(const TrainConfig& config);

/// One interaction with its histories already built.
struct Example {
  data::HistoryPair histories;
  double rating = 0.0;
  int label = 0;
};

std::vector<Example> prepare_examples(const data::InteractionDataset& dataset,
                                      std::span<const data::Interaction> interactions, const ModelConfig& config,
                                      bool exclude_target);

using Batch = std::span<const Example* const>;

struct StepLosses {
  std::optional<double> classification;
  std::optional<double> regression;
};

/// Phase (a): cross-entropy step on theta1; w_reg enters only as a constant.
double classification_phase(Model& model, Batch batch, OptimizerState& classifier_opt, double dropout,
                            Rng& dropout_rng);

/// Phase (b): fresh forward pass with theta1 frozen; MSE step on w_reg only.
double regression_phase(Model& model, Batch batch, OptimizerState& regression_opt, double dropout,
                        Rng& dropout_rng);

/// Phase (a) then phase (b).
StepLosses dual_step(Model& model, Batch batch, OptimizerState& classifier_opt, OptimizerState& regression_opt,
                     double dropout, Rng& classification_rng, Rng& regression_rng);

/// MSE through every parameter with a single optimizer.
double regression_only_step(Model& model, Batch batch, OptimizerState& optimizer, double dropout, Rng& dropout_rng);

/// Variant-appropriate step; `regression_opt` is unused by the variants
/// without a regression phase.
StepLosses training_step(Model& model, Batch batch, OptimizerState& primary_opt, OptimizerState& regression_opt,
                         double dropout, Rng& classification_rng, Rng& regression_rng);

/// theta1, theta2, or all parameters, in registration order.
std::vector<Tensor*> classifier_parameters(Model& model);
std::vector<Tensor*> regression_parameters(Model& model);

/// Optimizers matching training_step for the model's variant.
std::pair<OptimizerState, OptimizerState> make_optimizers(Model& model, const TrainConfig& config);

struct EpochRecord {
  std::size_t epoch = 0;
  std::optional<double> classification_loss;
  std::optional<double> regression_loss;
  double train_mse = 0.0;
  std::optional<double> validation_mse;
};

struct TrainResult {
  Model model;  // the selected snapshot
  Model initial;
  std::vector<EpochRecord> history;
  std::size_t selected_epoch = 0;
  std::size_t fit_size = 0;
  std::size_t validation_size = 0;
};

/// Evaluation-mode MSE of the model over prepared examples.
double examples_mse(const Model& model, std::span<const Example> examples);

TrainResult train(const TrainConfig& config, const data::InteractionDataset& dataset);

}  // namespace tado::training
