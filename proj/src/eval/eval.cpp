#include "tado/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tado/errors.hpp"
#include "tado/training/config_json.hpp"

namespace tado::eval {

using nlohmann::json;

EvalReport report_from_predictions(std::span<const double> predictions, std::span<const double> ratings) {
  if (predictions.empty()) throw ContractError("evaluation on an empty split");
  if (predictions.size() != ratings.size()) throw ContractError("prediction and rating counts differ");
  EvalReport r;
  r.n = predictions.size();
  std::map<int, double> sums;
  double total = 0.0;
  for (std::size_t i = 0; i < r.n; ++i) {
    const double level = std::round(ratings[i]);
    if (level != ratings[i]) throw ContractError("rating " + std::to_string(ratings[i]) + " is not a level");
    const double d = predictions[i] - ratings[i];
    r.squared_errors.push_back(d * d);
    total += d * d;
    sums[static_cast<int>(level)] += d * d;
    ++r.per_level[static_cast<int>(level)].count;
  }
  r.mse = total / static_cast<double>(r.n);
  for (auto& [level, stats] : r.per_level) stats.mse = sums[level] / static_cast<double>(stats.count);
  return r;
}

EvalReport evaluate(const training::Model& model, const data::InteractionDataset& dataset,
                    std::span<const data::Interaction> split, bool exclude_target) {
  if (split.empty()) throw ContractError("evaluation on an empty split");
  if (dataset.dim != model.config.dim) throw ContractError("dataset dimension does not match the model");
  data::HistoryPair current;
  const std::vector<double> predictions =
      training::predict_ratings(model, split.size(), [&](std::size_t i) -> const data::HistoryPair& {
        current = data::build_histories(dataset, split[i], model.config.user_len, model.config.item_len,
                                        exclude_target);
        return current;
      });
  std::vector<double> ratings;
  for (const data::Interaction& x : split) ratings.push_back(x.rating);
  EvalReport r = report_from_predictions(predictions, ratings);
  r.variant = std::string(training::variant_tag(model.config.variant));
  return r;
}

std::pair<EvalReport, training::TrainResult> train_and_evaluate(const training::TrainConfig& config,
                                                                const data::InteractionDataset& dataset) {
  training::TrainResult trained = training::train(config, dataset);
  EvalReport r = evaluate(trained.model, dataset, dataset.test, config.exclude_target);
  r.seed = config.seed;
  r.config = training::to_json(config);
  r.history = trained.history;
  r.selected_epoch = trained.selected_epoch;
  return {std::move(r), std::move(trained)};
}

EvalReport run_ablation(training::Variant variant, training::TrainConfig config,
                        const data::InteractionDataset& dataset) {
  config.model.variant = variant;
  return train_and_evaluate(config, dataset).first;
}

namespace {

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> number_or_null(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

json to_json(const EvalReport& r) {
  json levels = json::object();
  for (const auto& [level, stats] : r.per_level) {
    levels[std::to_string(level)] = {{"count", stats.count}, {"mse", stats.mse}};
  }
  json history = json::array();
  for (const training::EpochRecord& e : r.history) {
    history.push_back({{"classification_loss", optional_number(e.classification_loss)},
                       {"epoch", e.epoch},
                       {"regression_loss", optional_number(e.regression_loss)},
                       {"train_mse", e.train_mse},
                       {"validation_mse", optional_number(e.validation_mse)}});
  }
  return {{"config", r.config},         {"history", history},
          {"mse", r.mse},               {"n", r.n},
          {"per_level", levels},        {"seed", r.seed},
          {"selected_epoch", r.selected_epoch}, {"squared_errors", r.squared_errors},
          {"variant", r.variant}};
}

EvalReport report_from_json(const json& j) {
  try {
    EvalReport r;
    r.variant = j.at("variant").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n = j.at("n").get<std::size_t>();
    r.mse = j.at("mse").get<double>();
    r.squared_errors = j.at("squared_errors").get<std::vector<double>>();
    r.config = j.at("config");
    r.selected_epoch = j.at("selected_epoch").get<std::size_t>();
    for (const auto& [key, stats] : j.at("per_level").items()) {
      r.per_level[std::stoi(key)] = {stats.at("mse").get<double>(), stats.at("count").get<std::size_t>()};
    }
    for (const json& e : j.at("history")) {
      r.history.push_back({e.at("epoch").get<std::size_t>(), number_or_null(e.at("classification_loss")),
                           number_or_null(e.at("regression_loss")), e.at("train_mse").get<double>(),
                           number_or_null(e.at("validation_mse"))});
    }
    if (r.squared_errors.size() != r.n) throw FormatError("squared_errors length differs from n", 0);
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed report: ") + e.what(), 0);
  } catch (const std::invalid_argument&) {
    throw FormatError("malformed report: non-numeric level key", 0);
  }
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ContractError("wilcoxon: paired samples differ in length");
  if (a.empty()) throw ContractError("wilcoxon: empty samples");
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  }
  WilcoxonResult out;
  const std::size_t m = d.size();
  out.nonzero = m;
  if (m == 0) return out;

  // Doubled average ranks, so ties stay integral.
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return std::abs(d[x]) < std::abs(d[y]); });
  std::vector<std::uint64_t> ranks2(m);
  double tie_term = 0.0;
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j < m && std::abs(d[order[j]]) == std::abs(d[order[i]])) ++j;
    for (std::size_t t = i; t < j; ++t) ranks2[order[t]] = i + j + 1;  // 2 * mean of ranks i+1..j
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    i = j;
  }
  std::uint64_t observed2 = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] > 0) observed2 += ranks2[i];
  }
  out.statistic = static_cast<double>(observed2) / 2.0;

  if (m <= kExactWilcoxonLimit) {
    const std::uint64_t total2 = std::accumulate(ranks2.begin(), ranks2.end(), std::uint64_t{0});
    std::vector<std::uint64_t> ways(total2 + 1, 0);
    ways[0] = 1;
    for (std::uint64_t r : ranks2) {
      for (std::uint64_t s = total2; s >= r; --s) ways[s] += ways[s - r];
    }
    std::uint64_t low = 0, high = 0;
    for (std::uint64_t s = 0; s <= total2; ++s) {
      if (s <= observed2) low += ways[s];
      if (s >= observed2) high += ways[s];
    }
    const double p = 2.0 * static_cast<double>(std::min(low, high)) / std::ldexp(1.0, static_cast<int>(m));
    out.p_value = std::min(1.0, p);
    return out;
  }

  out.exact = false;
  const double md = static_cast<double>(m);
  const double mean = md * (md + 1.0) / 4.0;
  const double var = md * (md + 1.0) * (2.0 * md + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) return out;
  const double z = std::max(0.0, std::abs(out.statistic - mean) - 0.5) / std::sqrt(var);
  out.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
  return out;
}

}  // namespace tado::eval
