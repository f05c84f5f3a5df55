#include "tado/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tado/data/corpus.hpp"
#include "tado/errors.hpp"

namespace tado::data {

namespace {

Interaction interaction_of(const std::vector<EmbeddedReview>& reviews, std::size_t index) {
  const EmbeddedReview& r = reviews[index];
  return Interaction{index, r.user_index, r.item_index, static_cast<double>(r.rating), r.timestamp};
}

EmbeddedHistory gather(const InteractionDataset& ds, const std::vector<std::size_t>& pool, std::size_t max_len,
                       const Interaction& target, bool exclude_target) {
  std::vector<std::size_t> chosen;
  chosen.reserve(max_len);
  // Walk newest to oldest and stop once max_len survivors are found.
  for (auto it = pool.rbegin(); it != pool.rend() && chosen.size() < max_len; ++it) {
    const EmbeddedReview& r = ds.reviews[*it];
    if (exclude_target && r.user_index == target.user && r.item_index == target.item) continue;
    chosen.push_back(*it);
  }
  std::reverse(chosen.begin(), chosen.end());

  EmbeddedHistory h{Tensor(Shape{max_len, ds.dim}), chosen.size()};
  for (std::size_t row = 0; row < chosen.size(); ++row) {
    const auto& v = ds.reviews[chosen[row]].vector;
    for (std::size_t c = 0; c < ds.dim; ++c) h.matrix(row, c) = static_cast<double>(v[c]);
  }
  return h;
}

}  // namespace

InteractionDataset make_dataset(std::vector<EmbeddedReview> reviews, std::uint32_t dim, double split_ratio,
                                std::optional<int> classes) {
  InteractionDataset ds;
  ds.dim = dim;
  for (std::size_t i = 0; i < reviews.size(); ++i) {
    const EmbeddedReview& r = reviews[i];
    if (r.vector.size() != dim) {
      throw ContractError("review " + std::to_string(i) + " has dimension " + std::to_string(r.vector.size()));
    }
    if (classes) {
      const double level = static_cast<double>(r.rating);
      if (level != std::round(level) || level < 1.0 || level > *classes) {
        throw ContractError("review " + std::to_string(i) + " has rating " + std::to_string(level) +
                            ", expected an integer level in [1, " + std::to_string(*classes) + "]");
      }
    }
    ds.num_users = std::max<std::size_t>(ds.num_users, r.user_index + 1);
    ds.num_items = std::max<std::size_t>(ds.num_items, r.item_index + 1);
  }
  ds.reviews = std::move(reviews);

  std::vector<std::int64_t> stamps;
  stamps.reserve(ds.reviews.size());
  for (const EmbeddedReview& r : ds.reviews) stamps.push_back(r.timestamp);
  const SplitIndices split = time_split_indices(stamps, split_ratio);
  for (std::size_t i : split.train) ds.train.push_back(interaction_of(ds.reviews, i));
  for (std::size_t i : split.test) ds.test.push_back(interaction_of(ds.reviews, i));

  ds.user_reviews.resize(ds.num_users);
  ds.item_reviews.resize(ds.num_items);
  std::vector<std::size_t> chronological = split.train;
  chronological.insert(chronological.end(), split.test.begin(), split.test.end());
  for (std::size_t i : chronological) {
    ds.user_reviews[ds.reviews[i].user_index].push_back(i);
    ds.item_reviews[ds.reviews[i].item_index].push_back(i);
  }
  return ds;
}

HistoryPair build_histories(const InteractionDataset& dataset, const Interaction& target, std::size_t n,
                            std::size_t k, bool exclude_target) {
  if (target.user >= dataset.num_users || target.item >= dataset.num_items) {
    throw ContractError("build_histories: target user or item not in the dataset");
  }
  return HistoryPair{gather(dataset, dataset.user_reviews[target.user], n, target, exclude_target),
                     gather(dataset, dataset.item_reviews[target.item], k, target, exclude_target)};
}

}  // namespace tado::data
