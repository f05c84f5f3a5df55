#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "tado/data/review.hpp"
#include "tado/diffcore/tensor.hpp"

namespace tado::data {

/// A (user, item, rating) event; `review` indexes InteractionDataset::reviews.
struct Interaction {
  std::size_t review = 0;
  std::uint64_t user = 0;
  std::uint64_t item = 0;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

/// Up to max_len review vectors in chronological order, zero rows after
/// `length`.
struct EmbeddedHistory {
  Tensor matrix;
  std::size_t length = 0;

  bool degenerate() const { return length == 0; }
};

struct HistoryPair {
  EmbeddedHistory user;
  EmbeddedHistory item;
};

/// Reviews with a global time-based train/test split and per-user and
/// per-item review indexes (chronological, ties in record order). The
/// indexes cover every review, train and test alike; leakage of a target's
/// own review is controlled per query by build_histories.
struct InteractionDataset {
  std::vector<EmbeddedReview> reviews;
  std::uint32_t dim = 0;
  std::size_t num_users = 0;
  std::size_t num_items = 0;
  std::vector<Interaction> train;  // chronological
  std::vector<Interaction> test;   // chronological
  std::vector<std::vector<std::size_t>> user_reviews;
  std::vector<std::vector<std::size_t>> item_reviews;
};

/// When `classes` is set every rating must be an integer level in
/// [1, classes] (ContractError otherwise). Split errors propagate.
InteractionDataset make_dataset(std::vector<EmbeddedReview> reviews, std::uint32_t dim, double split_ratio,
                                std::optional<int> classes);

/// The n most recent user reviews and k most recent item reviews, oldest
/// first. With `exclude_target`, every review whose (user, item) equals the
/// target's is left out of both. An empty result is the zero history with
/// length 0 (see EmbeddedHistory::degenerate).
HistoryPair build_histories(const InteractionDataset& dataset, const Interaction& target, std::size_t n,
                            std::size_t k, bool exclude_target);

}  // namespace tado::data
