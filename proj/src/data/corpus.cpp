#include "tado/data/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "tado/errors.hpp"

namespace tado::data {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

ParsedReviews parse_reviews(std::istream& in) {
  ParsedReviews out;
  std::string line;
  while (std::getline(in, line)) {
    if (is_blank(line)) continue;
    const nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      ++out.skipped;
      continue;
    }
    const auto user = j.find("reviewerID");
    const auto item = j.find("asin");
    const auto rating = j.find("overall");
    const auto time = j.find("unixReviewTime");
    const auto text = j.find("reviewText");
    if (user == j.end() || !user->is_string() || item == j.end() || !item->is_string() ||
        rating == j.end() || !rating->is_number() || time == j.end() || !time->is_number_integer() ||
        text == j.end() || !text->is_string()) {
      ++out.skipped;
      continue;
    }
    const double r = rating->get<double>();
    if (!std::isfinite(r)) {
      ++out.skipped;
      continue;
    }
    out.records.push_back(ReviewRecord{user->get<std::string>(), item->get<std::string>(), r,
                                       time->get<std::int64_t>(), text->get<std::string>()});
  }
  if (out.records.empty()) {
    throw EmptyCorpusError("no parseable review lines (" + std::to_string(out.skipped) + " skipped)");
  }
  return out;
}

std::vector<ReviewRecord> five_core_filter(std::vector<ReviewRecord> records, std::size_t threshold) {
  // Peel records attached to under-threshold users or items; each removal
  // may push its partner below the threshold, so queue that partner.
  std::unordered_map<std::string, std::vector<std::size_t>> by_user, by_item;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_user[records[i].user_id].push_back(i);
    by_item[records[i].item_id].push_back(i);
  }
  std::unordered_map<std::string, std::size_t> user_count, item_count;
  for (const auto& [k, v] : by_user) user_count[k] = v.size();
  for (const auto& [k, v] : by_item) item_count[k] = v.size();

  std::vector<bool> alive(records.size(), true);
  std::vector<std::pair<bool, std::string>> queue;  // (is_user, key)
  for (const auto& [k, c] : user_count) {
    if (c < threshold) queue.emplace_back(true, k);
  }
  for (const auto& [k, c] : item_count) {
    if (c < threshold) queue.emplace_back(false, k);
  }
  while (!queue.empty()) {
    auto [is_user, key] = std::move(queue.back());
    queue.pop_back();
    const auto& members = is_user ? by_user[key] : by_item[key];
    for (std::size_t i : members) {
      if (!alive[i]) continue;
      alive[i] = false;
      const ReviewRecord& r = records[i];
      std::size_t& uc = user_count[r.user_id];
      if (uc-- == threshold) queue.emplace_back(true, r.user_id);
      std::size_t& ic = item_count[r.item_id];
      if (ic-- == threshold) queue.emplace_back(false, r.item_id);
    }
  }

  std::vector<ReviewRecord> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (alive[i]) kept.push_back(std::move(records[i]));
  }
  if (kept.empty()) {
    throw EmptyCorpusError("core filter with threshold " + std::to_string(threshold) + " removed every record");
  }
  return kept;
}

SplitIndices time_split_indices(std::span<const std::int64_t> timestamps, double ratio) {
  const std::size_t n = timestamps.size();
  if (n < 2) throw SplitError("time split needs at least 2 records, got " + std::to_string(n));
  if (!(ratio > 0.0 && ratio < 1.0)) throw SplitError("time split ratio must lie in (0, 1)");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return timestamps[a] < timestamps[b]; });
  const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  if (cut == 0 || cut == n) {
    throw SplitError("time split with ratio " + std::to_string(ratio) + " leaves an empty side for " +
                     std::to_string(n) + " records");
  }
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return out;
}

}  // namespace tado::data
