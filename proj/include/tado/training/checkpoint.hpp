#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>

#include "tado/training/model.hpp"

namespace tado::training {

// Little-endian layout:
//   "TADOMDL1" | u32 version (1)
//   u32 |V| | u32 r | u32 h | u32 C | u32 n | u32 k | u32 flags
//   u32 tag length | variant tag bytes
//   u64 scalar count | count x f64 parameter values
// flags: bit 0 shared projection, bit 1 argmax decode. Parameters follow
// the registration order of ModelParams: classifier (user, item,
// projection, interaction, direct_head) then w_reg, each tensor row-major.

inline constexpr char kCheckpointMagic[8] = {'T', 'A', 'D', 'O', 'M', 'D', 'L', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const Model& model);
/// FormatError on a bad magic, version, header or parameter payload.
Model read_checkpoint(std::istream& in);

void write_checkpoint_file(const std::filesystem::path& path, const Model& model);
Model read_checkpoint_file(const std::filesystem::path& path);

}  // namespace tado::training
