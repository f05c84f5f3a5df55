#include "tado/training/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "tado/binary_io.hpp"
#include "tado/diffcore/param_tree.hpp"
#include "tado/errors.hpp"

namespace tado::training {

namespace {

constexpr std::uint32_t kSharedProjection = 1u << 0;
constexpr std::uint32_t kArgmaxDecode = 1u << 1;
constexpr std::uint32_t kMaxTagLength = 64;

}  // namespace

void write_checkpoint(std::ostream& out, const Model& model) {
  using binary::put_le;
  const ModelConfig& c = model.config;
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  for (std::size_t v : {c.dim, c.rows(), c.hidden, c.classes, c.user_len, c.item_len}) {
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v));
  }
  std::uint32_t flags = 0;
  if (c.shared_projection) flags |= kSharedProjection;
  if (c.decode == Decode::argmax) flags |= kArgmaxDecode;
  put_le<std::uint32_t>(out, flags);
  const std::string_view tag = variant_tag(c.variant);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tag.size()));
  out.write(tag.data(), static_cast<std::streamsize>(tag.size()));
  put_le<std::uint64_t>(out, scalar_count(model.params));
  visit_leaves(model.params, "", [&](const std::string&, const Tensor& t) {
    for (double v : t.data()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(v));
  });
}

Model read_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)];
  in.read(magic, sizeof(magic));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(magic))) {
    throw FormatError("truncated magic", static_cast<std::uint64_t>(in.gcount()));
  }
  if (std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw FormatError("bad magic, expected TADOMDL1", 0);
  binary::Reader reader(in, sizeof(magic));
  const auto version = reader.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported version " + std::to_string(version), sizeof(magic));
  }
  const std::uint64_t header_at = reader.offset();
  ModelConfig c;
  c.dim = reader.get<std::uint32_t>("dimension");
  const auto rows = reader.get<std::uint32_t>("row count");
  c.hidden = reader.get<std::uint32_t>("hidden width");
  c.classes = reader.get<std::uint32_t>("class count");
  c.user_len = reader.get<std::uint32_t>("user history length");
  c.item_len = reader.get<std::uint32_t>("item history length");
  const auto flags = reader.get<std::uint32_t>("flags");
  if (flags & ~(kSharedProjection | kArgmaxDecode)) throw FormatError("unknown flag bits", reader.offset() - 4);
  c.shared_projection = (flags & kSharedProjection) != 0;
  c.decode = (flags & kArgmaxDecode) ? Decode::argmax : Decode::expectation;
  const auto tag_length = reader.get<std::uint32_t>("variant tag length");
  if (tag_length > kMaxTagLength) throw FormatError("variant tag too long", reader.offset() - 4);
  const std::uint64_t tag_at = reader.offset();
  const std::string tag = reader.get_bytes(tag_length, "variant tag");
  try {
    c.variant = parse_variant(tag);
  } catch (const ContractError&) {
    throw FormatError("unknown variant tag '" + tag + "'", tag_at);
  }
  if (c.dim == 0 || c.hidden == 0 || c.classes < 2 || c.user_len == 0 || c.item_len == 0) {
    throw FormatError("invalid model dimensions", header_at);
  }
  if (rows != c.rows()) {
    throw FormatError("row count " + std::to_string(rows) + " does not match variant " + tag, header_at + 4);
  }

  Model model = init_model(c, 0);
  const std::uint64_t count_at = reader.offset();
  const auto count = reader.get<std::uint64_t>("parameter count");
  if (count != scalar_count(model.params)) {
    throw FormatError("parameter count " + std::to_string(count) + " does not match header (expected " +
                          std::to_string(scalar_count(model.params)) + ")",
                      count_at);
  }
  visit_leaves(model.params, "", [&](const std::string&, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::bit_cast<double>(reader.get<std::uint64_t>("parameter"));
  });
  if (!reader.at_end()) throw FormatError("trailing bytes after parameters", reader.offset());
  return model;
}

void write_checkpoint_file(const std::filesystem::path& path, const Model& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

Model read_checkpoint_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

}  // namespace tado::training
