#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tado::data {

/// 64-bit FNV-1a over the raw bytes.
std::uint64_t stable_hash(std::string_view bytes);

/// Deterministic stand-in for a sentence encoder: a unit-L2 vector of
/// `dim` standard normal draws from a generator keyed by (hash(text), seed).
/// Throws ContractError when dim is 0.
std::vector<double> pseudo_embed(std::string_view text, std::size_t dim, std::uint64_t seed);

}  // namespace tado::data
