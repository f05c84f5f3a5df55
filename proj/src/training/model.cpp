#include "tado/training/model.hpp"

#include <algorithm>

#include "tado/diffcore/ops.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"

namespace tado::training {

namespace {

constexpr std::array<std::string_view, 5> kVariantTags{"full", "no-lstm", "no-interaction", "no-weight-learning",
                                                       "regression-only"};

void validate(const ModelConfig& c) {
  if (c.dim == 0 || c.hidden == 0 || c.user_len == 0 || c.item_len == 0) {
    throw ContractError("model sizes |V|, h, n and k must be positive");
  }
  if (c.classes < 2) throw ContractError("at least two rating classes are required");
}

}  // namespace

std::string_view variant_tag(Variant v) { return kVariantTags[static_cast<std::size_t>(v)]; }

Variant parse_variant(std::string_view tag) {
  const auto it = std::find(kVariantTags.begin(), kVariantTags.end(), tag);
  if (it == kVariantTags.end()) throw ContractError("unknown variant '" + std::string(tag) + "'");
  return kAllVariants[static_cast<std::size_t>(it - kVariantTags.begin())];
}

std::string_view decode_tag(Decode d) { return d == Decode::expectation ? "expectation" : "argmax"; }

Decode parse_decode(std::string_view tag) {
  if (tag == "expectation") return Decode::expectation;
  if (tag == "argmax") return Decode::argmax;
  throw ContractError("unknown decode rule '" + std::string(tag) + "'");
}

Model init_model(const ModelConfig& config, std::uint64_t seed) {
  validate(config);
  Rng rng(seed);
  const std::size_t r = config.rows();
  Model model{config, {}};
  auto& c = model.params.classifier;
  c.user = features::init_user_features(config.dim, config.uses_recurrent(), rng);
  c.item = features::init_item_features(r, rng);
  c.projection = attention::init_projection(r, config.dim, config.shared_projection, rng);
  if (config.uses_interaction()) {
    c.interaction = interaction::init_interaction(r, config.dim, config.hidden, config.classes, rng);
  } else {
    c.direct_head = init_affine(config.classes, 2 * r * config.dim, Shape{config.classes}, rng);
  }
  model.params.w_reg = prediction::initial_regression_weights(config.classes);
  return model;
}

std::size_t parameter_count(const Model& model) { return scalar_count(model.params); }

Var classifier_logits(Tape& tape, const ModelConfig& config, const ClassifierParams<Var>& params,
                      const data::HistoryPair& histories, const DropoutSpec& dropout) {
  const Var f_u = features::user_features(tape, histories.user, params.user);
  const Var f_i = features::item_features(tape, histories.item, params.item);
  const auto state = attention::co_attention(f_u, f_i, params.projection);
  if (config.uses_interaction()) {
    const Var s_ui = interaction::fuse(f_u, state.user_context, f_i, state.item_context, *params.interaction);
    return interaction::interaction_vector(state.user_context, state.item_context, s_ui, *params.interaction,
                                           dropout);
  }
  return interaction::direct_vector(state.user_context, state.item_context, *params.direct_head, dropout);
}

Var rating_from_logits(const ModelConfig& config, Var logits, Var w_reg) {
  const Var probs = prediction::classify(logits);
  if (config.uses_projection()) return prediction::project_rating(probs, w_reg);
  Tape& tape = logits.tape();
  const std::size_t c = config.classes;
  if (config.decode == Decode::argmax) {
    const std::size_t best = max_over_axis(probs.value(), 0).argmax[0];
    return tape.constant(Tensor::scalar(static_cast<double>(best + 1)));
  }
  Tensor levels(Shape{c});
  for (std::size_t i = 0; i < c; ++i) levels[i] = static_cast<double>(i + 1);
  return dot(probs, tape.constant(levels));
}

prediction::RatingDistribution predict_distribution(const Model& model, const data::HistoryPair& histories) {
  Tape tape;
  const auto bound = bind(tape, model.params.classifier, false);
  const Var logits = classifier_logits(tape, model.config, bound, histories, DropoutSpec::eval());
  return prediction::classify(logits.value().data());
}

double predict_rating(const Model& model, const data::HistoryPair& histories) {
  Tape tape;
  const auto bound = bind(tape, model.params, false);
  const Var logits = classifier_logits(tape, model.config, bound.classifier, histories, DropoutSpec::eval());
  return rating_from_logits(model.config, logits, bound.w_reg).value().item();
}

std::vector<double> predict_ratings(const Model& model, std::size_t count,
                                    const std::function<const data::HistoryPair&(std::size_t)>& histories) {
  constexpr std::size_t kChunk = 64;
  std::vector<double> out;
  out.reserve(count);
  for (std::size_t begin = 0; begin < count; begin += kChunk) {
    Tape tape;
    const auto bound = bind(tape, model.params, false);
    for (std::size_t i = begin; i < std::min(count, begin + kChunk); ++i) {
      const Var logits = classifier_logits(tape, model.config, bound.classifier, histories(i), DropoutSpec::eval());
      out.push_back(rating_from_logits(model.config, logits, bound.w_reg).value().item());
    }
  }
  return out;
}

}  // namespace tado::training
