#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "tado/data/dataset.hpp"
#include "tado/training/trainer.hpp"

namespace tado::eval {

struct LevelStats {
  double mse = 0.0;
  std::size_t count = 0;
};

struct EvalReport {
  std::string variant;
  std::uint64_t seed = 0;
  std::size_t n = 0;
  double mse = 0.0;
  std::map<int, LevelStats> per_level;  // keyed by true rating level
  std::vector<double> squared_errors;   // in split order, for paired tests
  nlohmann::json config = nlohmann::json::object();
  std::vector<training::EpochRecord> history;
  std::size_t selected_epoch = 0;
};

/// Overall and per-level MSE; ratings must be integer levels. ContractError
/// on an empty or mismatched input.
EvalReport report_from_predictions(std::span<const double> predictions, std::span<const double> ratings);

/// Evaluation-mode predictions over `split` (dropout off).
EvalReport evaluate(const training::Model& model, const data::InteractionDataset& dataset,
                    std::span<const data::Interaction> split, bool exclude_target);

/// Trains `config` with its variant replaced by `variant`, then evaluates on
/// the test split. The report carries the config, seed and training history.
EvalReport run_ablation(training::Variant variant, training::TrainConfig config,
                        const data::InteractionDataset& dataset);

/// Same as run_ablation with the variant already in `config`; also returns
/// the trained model.
std::pair<EvalReport, training::TrainResult> train_and_evaluate(const training::TrainConfig& config,
                                                                const data::InteractionDataset& dataset);

/// Keys sorted; round-trips through report_from_json.
nlohmann::json to_json(const EvalReport& report);
/// FormatError on a missing or mistyped field.
EvalReport report_from_json(const nlohmann::json& j);

struct WilcoxonResult {
  double p_value = 1.0;
  double statistic = 0.0;  // sum of ranks of positive differences
  std::size_t nonzero = 0;  // m
  bool exact = true;
};

inline constexpr std::size_t kExactWilcoxonLimit = 25;

/// Two-sided signed-rank test on paired samples. Zero differences are
/// dropped and ties get average ranks. Exact null distribution for
/// m <= 25, normal approximation with tie and continuity correction beyond.
/// ContractError when lengths differ or are zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

}  // namespace tado::eval
