#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tado/attention/co_attention.hpp"
#include "tado/data/dataset.hpp"
#include "tado/features/features.hpp"
#include "tado/interaction/interaction.hpp"
#include "tado/layers.hpp"
#include "tado/prediction/prediction.hpp"

namespace tado::training {

enum class Variant { full, no_lstm, no_interaction, no_weight_learning, regression_only };

inline constexpr std::array<Variant, 5> kAllVariants{Variant::full, Variant::no_lstm, Variant::no_interaction,
                                                      Variant::no_weight_learning, Variant::regression_only};

std::string_view variant_tag(Variant v);
/// ContractError on an unknown tag.
Variant parse_variant(std::string_view tag);

/// How the no-weight-learning variant turns a distribution into a rating.
enum class Decode { expectation, argmax };

std::string_view decode_tag(Decode d);
Decode parse_decode(std::string_view tag);

struct ModelConfig {
  std::size_t dim = 16;        // |V|
  std::size_t hidden = 64;     // h
  std::size_t classes = 5;     // C
  std::size_t user_len = 10;   // n
  std::size_t item_len = 10;   // k
  bool shared_projection = false;
  Variant variant = Variant::full;
  Decode decode = Decode::expectation;

  /// Feature rows r: 5, or 3 without the recurrent rows.
  std::size_t rows() const { return variant == Variant::no_lstm ? 3 : 5; }
  bool uses_recurrent() const { return variant != Variant::no_lstm; }
  bool uses_interaction() const { return variant != Variant::no_interaction; }
  bool uses_projection() const { return variant != Variant::no_weight_learning; }

  bool operator==(const ModelConfig&) const = default;
};

/// theta1: everything that produces the class distribution.
template <class T = Tensor>
struct ClassifierParams {
  features::UserFeatureParams<T> user;
  features::ItemFeatureParams<T> item;
  attention::ProjectionParams<T> projection;
  std::optional<interaction::InteractionParams<T>> interaction;
  std::optional<AffineParams<T>> direct_head;

  auto tie() { return std::tie(user, item, projection, interaction, direct_head); }
  auto tie() const { return std::tie(user, item, projection, interaction, direct_head); }
  static constexpr std::array<std::string_view, 5> names{"user", "item", "projection", "interaction",
                                                         "direct_head"};
};

/// theta1 plus theta2 = {w_reg}.
template <class T = Tensor>
struct ModelParams {
  ClassifierParams<T> classifier;
  T w_reg;

  auto tie() { return std::tie(classifier, w_reg); }
  auto tie() const { return std::tie(classifier, w_reg); }
  static constexpr std::array<std::string_view, 2> names{"classifier", "w_reg"};
};

struct Model {
  ModelConfig config;
  ModelParams<> params;
};

/// Fresh parameters for `config`; w_reg starts at linspace(-2, 2, C).
Model init_model(const ModelConfig& config, std::uint64_t seed);

std::size_t parameter_count(const Model& model);

/// Class logits z for one interaction.
Var classifier_logits(Tape& tape, const ModelConfig& config, const ClassifierParams<Var>& params,
                      const data::HistoryPair& histories, const DropoutSpec& dropout);

/// Rating from logits: the learned projection, or the configured decode rule
/// for the no-weight-learning variant.
Var rating_from_logits(const ModelConfig& config, Var logits, Var w_reg);

/// Evaluation-mode class distribution and rating.
prediction::RatingDistribution predict_distribution(const Model& model, const data::HistoryPair& histories);
double predict_rating(const Model& model, const data::HistoryPair& histories);

/// Evaluation-mode ratings for `count` interactions; `histories(i)` supplies
/// the i-th pair. Parameters are bound once per chunk of interactions.
std::vector<double> predict_ratings(const Model& model, std::size_t count,
                                    const std::function<const data::HistoryPair&(std::size_t)>& histories);

}  // namespace tado::training
