#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tado/training/trainer.hpp"

namespace tado::cli {

/// Training settings plus file paths and ingest mode. Serialised as one
/// flat JSON object: the TrainConfig keys and the keys below.
struct RunConfig {
  training::TrainConfig train;
  /// True once `dim` was given explicitly; otherwise it follows the
  /// embedding file.
  bool dim_set = false;
  double split_ratio = 0.8;
  std::string reviews;
  std::string embeddings;
  std::string vocabulary;  // empty: next to the embedding file
  std::string checkpoint;
  std::string report;
  bool pseudo_embed = true;
  std::uint32_t pseudo_dim = 16;
  std::uint64_t pseudo_seed = 1;
};

nlohmann::json to_json(const RunConfig& config);
/// Overlays `j` onto `base`; ContractError on an unknown key or bad value.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);

/// Sidecar path used when RunConfig::vocabulary is empty: the embedding
/// path with its extension replaced by ".vocab.json".
std::string default_vocabulary_path(const std::string& embeddings);

/// Runs one command. `args` excludes the program name. Results go to `out`
/// as one JSON line; failures go to `err` as one JSON line
/// {"error": kind, "message": text}. Returns 0 on success, 2 on a usage
/// or configuration error, 1 on a data, format or check failure.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tado::cli
