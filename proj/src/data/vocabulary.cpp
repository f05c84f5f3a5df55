#include "tado/data/vocabulary.hpp"

#include <fstream>

#include "tado/errors.hpp"

namespace tado::data {

std::uint64_t IdMap::intern(const std::string& key) {
  const auto [it, inserted] = index_.try_emplace(key, names_.size());
  if (inserted) names_.push_back(key);
  return it->second;
}

std::uint64_t IdMap::at(const std::string& key) const {
  const auto it = index_.find(key);
  if (it == index_.end()) throw ContractError("unknown id '" + key + "'");
  return it->second;
}

namespace {

nlohmann::json map_to_json(const IdMap& ids) {
  nlohmann::json out = nlohmann::json::object();
  for (std::uint64_t i = 0; i < ids.size(); ++i) out[ids.name(i)] = i;
  return out;
}

IdMap map_from_json(const nlohmann::json& j, const char* field) {
  if (!j.is_object()) throw FormatError(std::string("vocabulary field '") + field + "' is not an object", 0);
  std::vector<std::string> names(j.size());
  std::vector<bool> seen(j.size(), false);
  for (const auto& [key, value] : j.items()) {
    if (!value.is_number_unsigned() || value.get<std::uint64_t>() >= names.size() ||
        seen[value.get<std::uint64_t>()]) {
      throw FormatError(std::string("vocabulary field '") + field + "' has a non-dense id for '" + key + "'", 0);
    }
    names[value.get<std::uint64_t>()] = key;
    seen[value.get<std::uint64_t>()] = true;
  }
  IdMap out;
  for (const std::string& n : names) out.intern(n);
  return out;
}

}  // namespace

nlohmann::json to_json(const Vocabulary& vocab) {
  return {{"users", map_to_json(vocab.users)}, {"items", map_to_json(vocab.items)}, {"dim", vocab.dim}};
}

Vocabulary vocabulary_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("users") || !j.contains("items") || !j.contains("dim") ||
      !j["dim"].is_number_unsigned()) {
    throw FormatError("vocabulary must be an object with users, items and dim", 0);
  }
  Vocabulary v;
  v.users = map_from_json(j["users"], "users");
  v.items = map_from_json(j["items"], "items");
  v.dim = j["dim"].get<std::uint32_t>();
  return v;
}

void write_vocabulary(const std::filesystem::path& path, const Vocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << to_json(vocab).dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

Vocabulary read_vocabulary(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  const nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw FormatError("vocabulary " + path.string() + " is not valid JSON", 0);
  return vocabulary_from_json(j);
}

}  // namespace tado::data
