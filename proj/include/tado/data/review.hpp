#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace tado::data {

/// One raw review as found in the JSON-lines dump.
struct ReviewRecord {
  std::string user_id;
  std::string item_id;
  double rating = 0.0;
  std::int64_t timestamp = 0;
  std::string text;

  bool operator==(const ReviewRecord&) const = default;
};

/// A review reduced to dense ids and a fixed-dimension vector.
struct EmbeddedReview {
  std::uint64_t user_index = 0;
  std::uint64_t item_index = 0;
  float rating = 0.0f;
  std::int64_t timestamp = 0;
  std::vector<float> vector;
};

}  // namespace tado::data
