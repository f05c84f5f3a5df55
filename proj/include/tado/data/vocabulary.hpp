#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace tado::data {

/// Dense id assignment for one namespace of string ids, in first-seen order.
class IdMap {
 public:
  std::uint64_t intern(const std::string& key);
  std::uint64_t at(const std::string& key) const;
  bool contains(const std::string& key) const { return index_.contains(key); }
  const std::string& name(std::uint64_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint64_t> index_;
};

/// User and item id maps plus the embedding dimension; persisted next to the
/// embedding file as {"users": {...}, "items": {...}, "dim": D}.
struct Vocabulary {
  IdMap users;
  IdMap items;
  std::uint32_t dim = 0;
};

nlohmann::json to_json(const Vocabulary& vocab);
/// Throws FormatError on a malformed document or non-dense ids.
Vocabulary vocabulary_from_json(const nlohmann::json& j);

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab);
Vocabulary read_vocabulary(const std::filesystem::path& path);

}  // namespace tado::data
