#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tg/ndnet/model.hpp"

namespace tg::zoo {

/// Model checkpoint container, all integers little-endian:
///
///   offset  size      field
///   0       4         magic "TGMD"
///   4       4         format version (u32, currently 1)
///   8       1         architecture id (ASCII)
///   9       4         input rank R (u32)
///   13      4*R       input dimensions (u32 each)
///   13+4R   8         parameter count N (u64)
///   21+4R   8*N       parameters (IEEE-754 float64)
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const nn::Model& model);

/// Rebuilds the architecture from its id (catalog or defender) and loads the
/// parameters. Throws FormatError / LengthError on malformed input.
nn::Model decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const nn::Model& model, const std::filesystem::path& path);
nn::Model load_checkpoint(const std::filesystem::path& path);

}  // namespace tg::zoo
