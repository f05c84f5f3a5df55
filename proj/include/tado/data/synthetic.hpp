#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tado/data/review.hpp"
#include "tado/data/vocabulary.hpp"

namespace tado::data {

struct SyntheticConfig {
  std::size_t interactions = 5000;
  /// Target share of each rating level 1..C; must sum to 1.
  std::vector<double> distribution{0.05, 0.05, 0.10, 0.35, 0.45};
  std::uint64_t seed = 1;
  std::uint32_t dim = 16;
  std::size_t latent = 4;
  std::size_t reviews_per_user = 10;
  double score_noise = 0.5;
  double vector_noise = 0.3;
};

struct SyntheticCorpus {
  std::vector<ReviewRecord> records;
  std::vector<EmbeddedReview> embedded;  // parallel to records
  Vocabulary vocab;
};

/// Corpus with a recoverable signal. Users carry a latent taste vector, a
/// bias and a linear drift over time; items carry a latent vector and a
/// bias. A latent score mixes these with noise, and rating levels are
/// assigned by score quantiles so the empirical histogram matches
/// `distribution` up to rounding. Each review vector encodes the user and
/// item latents plus a sentiment direction scaled by the rating.
///
/// The user/item graph is five-core by construction; records are passed
/// through five_core_filter anyway, so for very small requests the corpus
/// may hold fewer than `interactions` records.
SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config);

}  // namespace tado::data
