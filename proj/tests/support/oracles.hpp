#pragma once

// Independent reference implementations used only by tests.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tado/data/review.hpp"
#include "tado/rng.hpp"

namespace tado::testing {

/// Naive core filter: recount from scratch and drop every under-threshold
/// record in one sweep, until a sweep removes nothing.
inline std::vector<data::ReviewRecord> naive_core_filter(std::vector<data::ReviewRecord> records,
                                                         std::size_t threshold) {
  while (true) {
    std::map<std::string, std::size_t> users, items;
    for (const auto& r : records) {
      ++users[r.user_id];
      ++items[r.item_id];
    }
    std::vector<data::ReviewRecord> next;
    for (const auto& r : records) {
      if (users[r.user_id] >= threshold && items[r.item_id] >= threshold) next.push_back(r);
    }
    if (next.size() == records.size()) return next;
    records = std::move(next);
  }
}

inline std::vector<data::ReviewRecord> random_corpus(Rng& rng, std::size_t max_records) {
  const std::size_t n = 1 + rng.below(max_records);
  const std::size_t users = 1 + rng.below(12);
  const std::size_t items = 1 + rng.below(12);
  std::vector<data::ReviewRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(data::ReviewRecord{"u" + std::to_string(rng.below(users)), "i" + std::to_string(rng.below(items)),
                                     static_cast<double>(1 + rng.below(5)),
                                     static_cast<std::int64_t>(rng.below(50)), "t" + std::to_string(i)});
  }
  return out;
}

/// Two-sided exact Wilcoxon signed-rank p-value by listing all 2^m sign
/// patterns over the ranks of the nonzero |differences|.
inline double wilcoxon_enumeration(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] - b[i] != 0.0) d.push_back(a[i] - b[i]);
  }
  const std::size_t m = d.size();
  if (m == 0) return 1.0;
  std::vector<double> ranks(m);
  for (std::size_t i = 0; i < m; ++i) {
    // Average rank: 1 + #smaller + (#equal - 1) / 2.
    std::size_t smaller = 0, equal = 0;
    for (std::size_t j = 0; j < m; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++smaller;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    ranks[i] = 1.0 + smaller + (equal - 1) / 2.0;
  }
  double observed = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (d[i] > 0) observed += ranks[i];
  }
  std::uint64_t low = 0, high = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    double w = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::uint64_t{1} << i)) w += ranks[i];
    }
    if (w <= observed) ++low;
    if (w >= observed) ++high;
  }
  const double total = std::ldexp(1.0, static_cast<int>(m));
  const double p = 2.0 * static_cast<double>(std::min(low, high)) / total;
  return std::min(1.0, p);
}

}  // namespace tado::testing
