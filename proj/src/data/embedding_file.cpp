#include "tado/data/embedding_file.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "tado/binary_io.hpp"
#include "tado/errors.hpp"

namespace tado::data {

using binary::put_le;
using binary::Reader;

void write_embeddings(std::ostream& out, std::uint32_t dim, std::span<const EmbeddedReview> records) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].vector.size() != dim) {
      throw ContractError("record " + std::to_string(i) + " has dimension " +
                          std::to_string(records[i].vector.size()) + ", expected " + std::to_string(dim));
    }
  }
  out.write(kEmbeddingMagic, sizeof(kEmbeddingMagic));
  put_le<std::uint32_t>(out, kEmbeddingVersion);
  put_le<std::uint32_t>(out, dim);
  put_le<std::uint64_t>(out, records.size());
  for (const EmbeddedReview& r : records) {
    put_le<std::uint64_t>(out, r.user_index);
    put_le<std::uint64_t>(out, r.item_index);
    put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(r.rating));
    put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(r.timestamp));
    for (float v : r.vector) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  }
}

EmbeddingFile read_embeddings(std::istream& in) {
  char magic[sizeof(kEmbeddingMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(magic))) {
    throw FormatError("truncated magic", static_cast<std::uint64_t>(in.gcount()));
  }
  if (std::memcmp(magic, kEmbeddingMagic, sizeof(magic)) != 0) throw FormatError("bad magic, expected TADOEMB1", 0);
  Reader reader(in, sizeof(magic));
  const std::uint32_t version = reader.get<std::uint32_t>("version", -1);
  if (version != kEmbeddingVersion) {
    throw FormatError("unsupported version " + std::to_string(version), sizeof(magic));
  }
  EmbeddingFile file;
  file.dim = reader.get<std::uint32_t>("dim", -1);
  const std::uint64_t count = reader.get<std::uint64_t>("count", -1);
  if (file.dim == 0) throw FormatError("dimension must be positive", sizeof(magic) + 4);

  file.records.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto rec = static_cast<std::int64_t>(i);
    const std::uint64_t start = reader.offset();
    EmbeddedReview r;
    try {
      r.user_index = reader.get<std::uint64_t>("user_index", rec);
      r.item_index = reader.get<std::uint64_t>("item_index", rec);
      r.rating = std::bit_cast<float>(reader.get<std::uint32_t>("rating", rec));
      r.timestamp = std::bit_cast<std::int64_t>(reader.get<std::uint64_t>("timestamp", rec));
      r.vector.resize(file.dim);
      for (float& v : r.vector) v = std::bit_cast<float>(reader.get<std::uint32_t>("vector", rec));
    } catch (const FormatError& e) {
      throw FormatError("truncated record " + std::to_string(i) + " of " + std::to_string(count),
                        e.offset(), rec);
    }
    if (!std::isfinite(r.rating)) throw FormatError("non-finite rating", start, rec);
    for (float v : r.vector) {
      if (!std::isfinite(v)) throw FormatError("non-finite vector entry", start, rec);
    }
    file.records.push_back(std::move(r));
  }
  if (!reader.at_end()) throw FormatError("trailing bytes after last record", reader.offset());
  return file;
}

void write_embedding_file(const std::filesystem::path& path, std::uint32_t dim,
                          std::span<const EmbeddedReview> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_embeddings(out, dim, records);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

EmbeddingFile read_embedding_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_embeddings(in);
}

}  // namespace tado::data
