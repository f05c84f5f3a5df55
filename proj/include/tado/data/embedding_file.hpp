#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <vector>

#include "tado/data/review.hpp"

namespace tado::data {

// Little-endian layout:
//   "TADOEMB1" | u32 version (1) | u32 dim | u64 count
//   count x [u64 user_index][u64 item_index][f32 rating][i64 timestamp][dim x f32]

inline constexpr char kEmbeddingMagic[8] = {'T', 'A', 'D', 'O', 'E', 'M', 'B', '1'};
inline constexpr std::uint32_t kEmbeddingVersion = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 8 + 4 + 4 + 8;

struct EmbeddingFile {
  std::uint32_t dim = 0;
  std::vector<EmbeddedReview> records;
};

/// Throws ContractError if any vector's length differs from `dim`.
void write_embeddings(std::ostream& out, std::uint32_t dim, std::span<const EmbeddedReview> records);
/// Validates magic, version, dimension, record payloads and trailing bytes;
/// throws FormatError naming the byte offset and record index on failure.
EmbeddingFile read_embeddings(std::istream& in);

void write_embedding_file(const std::filesystem::path& path, std::uint32_t dim,
                          std::span<const EmbeddedReview> records);
EmbeddingFile read_embedding_file(const std::filesystem::path& path);

}  // namespace tado::data
