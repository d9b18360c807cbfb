#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "tg/dataio/dataset.hpp"

namespace tg::data {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Parses a big-endian IDX image/label file pair. Pixels are scaled by 1/255.
/// Throws FormatError on a wrong magic number or mismatched counts, LengthError
/// when a file is shorter than its header announces.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

Dataset parse_idx(const std::vector<std::uint8_t>& image_bytes, const std::vector<std::uint8_t>& label_bytes);

/// Inverse of parse_idx for datasets whose pixels are multiples of 1/255.
std::vector<std::uint8_t> encode_idx_images(const Dataset& ds);
std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds);

struct MnistSplits {
  Dataset train;
  Dataset test;
};

/// Loads the four standard MNIST files from `dir`; accepts both
/// "train-images-idx3-ubyte" and "train-images.idx3-ubyte" spellings.
MnistSplits load_mnist(const std::filesystem::path& dir);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);

}  // namespace tg::data
