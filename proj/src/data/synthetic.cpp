#include "tado/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <unordered_set>

#include "tado/data/corpus.hpp"
#include "tado/errors.hpp"
#include "tado/rng.hpp"

namespace tado::data {

namespace {

constexpr std::int64_t kEpoch = 1'262'304'000;            // 2010-01-01
constexpr std::int64_t kSpan = 3 * 365 * 24 * 60 * 60;   // three years

std::string make_id(char prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%c%05zu", prefix, n);
  return buf;
}

std::vector<double> normal_vector(Rng& rng, std::size_t n, double sd = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = sd * rng.normal();
  return v;
}

// Level counts by largest remainder so they sum exactly to n.
std::vector<std::size_t> level_counts(const std::vector<double>& dist, std::size_t n) {
  std::vector<std::size_t> counts(dist.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < dist.size(); ++c) {
    const double exact = dist[c] * static_cast<double>(n);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[c];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[remainders[i % remainders.size()].second];
  return counts;
}

}  // namespace

SyntheticCorpus make_synthetic_corpus(const SyntheticConfig& config) {
  if (config.distribution.size() < 2) throw ContractError("synthetic: need at least two rating levels");
  const double total = std::accumulate(config.distribution.begin(), config.distribution.end(), 0.0);
  if (std::abs(total - 1.0) > 1e-6 ||
      std::any_of(config.distribution.begin(), config.distribution.end(), [](double p) { return p < 0.0; })) {
    throw ContractError("synthetic: rating distribution must be non-negative and sum to 1");
  }
  if (config.reviews_per_user < 5) throw ContractError("synthetic: reviews_per_user must be at least 5");
  if (config.interactions < config.reviews_per_user) throw ContractError("synthetic: too few interactions");
  if (config.dim == 0 || config.latent == 0) throw ContractError("synthetic: dim and latent must be positive");

  Rng rng(config.seed);
  const std::size_t n = config.interactions;
  const std::size_t num_users = n / config.reviews_per_user;
  const std::size_t num_items = std::max(config.reviews_per_user + 2, n / 20);

  // Per-user review counts summing to n.
  std::vector<std::size_t> per_user(num_users, n / num_users);
  for (std::size_t u = 0; u < n % num_users; ++u) ++per_user[u];
  if (*std::max_element(per_user.begin(), per_user.end()) > num_items) {
    throw ContractError("synthetic: not enough items for the requested reviews per user");
  }

  // Items are dealt from a reshuffled deck so item counts stay balanced.
  std::vector<std::size_t> deck;
  std::size_t deck_pos = 0;
  auto draw_item = [&] {
    if (deck_pos == deck.size()) {
      deck.resize(num_items);
      std::iota(deck.begin(), deck.end(), std::size_t{0});
      rng.shuffle(std::span<std::size_t>(deck));
      deck_pos = 0;
    }
    return deck[deck_pos++];
  };

  struct Draft {
    std::size_t user, item;
    std::int64_t timestamp;
  };
  std::vector<Draft> drafts;
  drafts.reserve(n);
  for (std::size_t u = 0; u < num_users; ++u) {
    std::unordered_set<std::size_t> chosen;
    while (chosen.size() < per_user[u]) {
      const std::size_t item = draw_item();
      if (!chosen.insert(item).second) continue;
      const auto ts = kEpoch + static_cast<std::int64_t>(rng.below(static_cast<std::size_t>(kSpan)));
      drafts.push_back(Draft{u, item, ts});
    }
  }

  // Five-core pass over the structural graph.
  std::vector<ReviewRecord> structural;
  structural.reserve(drafts.size());
  for (std::size_t d = 0; d < drafts.size(); ++d) {
    structural.push_back(ReviewRecord{make_id('u', drafts[d].user), make_id('i', drafts[d].item), 0.0,
                                      drafts[d].timestamp, std::to_string(d)});
  }
  structural = five_core_filter(std::move(structural), 5);
  std::vector<Draft> kept;
  kept.reserve(structural.size());
  for (const ReviewRecord& r : structural) kept.push_back(drafts[std::stoul(r.text)]);

  // Latent factors.
  const std::size_t d = config.latent;
  std::vector<std::vector<double>> user_taste(num_users), item_taste(num_items);
  std::vector<double> user_bias(num_users), user_drift(num_users), item_bias(num_items);
  for (std::size_t u = 0; u < num_users; ++u) {
    user_taste[u] = normal_vector(rng, d);
    user_bias[u] = rng.normal();
    user_drift[u] = 0.5 * rng.normal();
  }
  for (std::size_t i = 0; i < num_items; ++i) {
    item_taste[i] = normal_vector(rng, d);
    item_bias[i] = rng.normal();
  }

  std::vector<double> scores(kept.size());
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Draft& k = kept[r];
    const double tau = static_cast<double>(k.timestamp - kEpoch) / static_cast<double>(kSpan);
    double affinity = 0.0;
    for (std::size_t j = 0; j < d; ++j) affinity += user_taste[k.user][j] * item_taste[k.item][j];
    scores[r] = user_bias[k.user] + user_drift[k.user] * (tau - 0.5) + item_bias[k.item] +
                affinity / std::sqrt(static_cast<double>(d)) + config.score_noise * rng.normal();
  }

  // Rating levels by score quantile.
  std::vector<std::size_t> order(kept.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  const std::vector<std::size_t> counts = level_counts(config.distribution, kept.size());
  std::vector<int> level(kept.size());
  std::size_t pos = 0;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    for (std::size_t j = 0; j < counts[c]; ++j) level[order[pos++]] = static_cast<int>(c) + 1;
  }

  // Review vectors: projected latents, a sentiment direction and noise.
  const std::size_t dim = config.dim;
  const double inv_sqrt_dim = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::vector<double>> user_proj(d), item_proj(d);
  for (std::size_t j = 0; j < d; ++j) {
    user_proj[j] = normal_vector(rng, dim, inv_sqrt_dim);
    item_proj[j] = normal_vector(rng, dim, inv_sqrt_dim);
  }
  std::vector<double> sentiment = normal_vector(rng, dim);
  const double sentiment_norm = std::sqrt(std::inner_product(sentiment.begin(), sentiment.end(), sentiment.begin(), 0.0));
  for (double& x : sentiment) x /= sentiment_norm;
  const double levels = static_cast<double>(config.distribution.size());
  const double mid = (levels + 1.0) / 2.0, half_range = (levels - 1.0) / 2.0;
  const double latent_scale = 1.0 / std::sqrt(static_cast<double>(d));

  SyntheticCorpus corpus;
  corpus.vocab.dim = config.dim;
  for (std::size_t r = 0; r < kept.size(); ++r) {
    const Draft& k = kept[r];
    const std::string user = make_id('u', k.user), item = make_id('i', k.item);
    std::vector<double> v(dim, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
      for (std::size_t c = 0; c < dim; ++c) {
        v[c] += latent_scale * (user_taste[k.user][j] * user_proj[j][c] + item_taste[k.item][j] * item_proj[j][c]);
      }
    }
    const double polarity = 1.5 * (level[r] - mid) / half_range;
    double norm2 = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      v[c] += polarity * sentiment[c] + config.vector_noise * inv_sqrt_dim * rng.normal();
      norm2 += v[c] * v[c];
    }
    const double inv = 1.0 / std::sqrt(norm2);

    EmbeddedReview e;
    e.user_index = corpus.vocab.users.intern(user);
    e.item_index = corpus.vocab.items.intern(item);
    e.rating = static_cast<float>(level[r]);
    e.timestamp = k.timestamp;
    e.vector.resize(dim);
    for (std::size_t c = 0; c < dim; ++c) e.vector[c] = static_cast<float>(v[c] * inv);
    corpus.embedded.push_back(std::move(e));
    corpus.records.push_back(ReviewRecord{user, item, static_cast<double>(level[r]), k.timestamp,
                                          "synthetic review of " + item + " by " + user});
  }
  return corpus;
}

}  // namespace tado::data
