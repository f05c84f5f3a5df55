#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <span>
#include <utility>
#include <vector>

#include "tado/data/review.hpp"

namespace tado::data {

struct ParsedReviews {
  std::vector<ReviewRecord> records;
  std::size_t skipped = 0;
};

/// Reads one review per line. Lines that are not JSON objects or lack any
/// of reviewerID, asin, overall, unixReviewTime, reviewText (with the right
/// types) are counted in `skipped`. Blank lines are ignored.
/// Throws EmptyCorpusError when no line parses.
ParsedReviews parse_reviews(std::istream& in);

/// Repeatedly drops records whose user or item has fewer than `threshold`
/// records until none remain to drop. Input order is preserved.
/// Throws EmptyCorpusError when nothing survives.
std::vector<ReviewRecord> five_core_filter(std::vector<ReviewRecord> records, std::size_t threshold = 5);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Stable-sorts by timestamp and sends the first floor(ratio * N) positions
/// to train. Throws SplitError when N < 2, the ratio is outside (0, 1), or
/// either side would be empty.
SplitIndices time_split_indices(std::span<const std::int64_t> timestamps, double ratio);

template <class Record>
std::pair<std::vector<Record>, std::vector<Record>> time_split(std::span<const Record> records, double ratio) {
  std::vector<std::int64_t> stamps;
  stamps.reserve(records.size());
  for (const Record& r : records) stamps.push_back(r.timestamp);
  const SplitIndices idx = time_split_indices(stamps, ratio);
  std::pair<std::vector<Record>, std::vector<Record>> out;
  for (std::size_t i : idx.train) out.first.push_back(records[i]);
  for (std::size_t i : idx.test) out.second.push_back(records[i]);
  return out;
}

}  // namespace tado::data
