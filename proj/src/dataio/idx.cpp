#include "tg/dataio/idx.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "tg/errors.hpp"

namespace tg::data {
namespace {

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08X", v);
  return buf;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t pos, const char* what) {
  if (b.size() < pos + 4) {
    throw LengthError(std::string(what) + ": file too short for its header (" + std::to_string(b.size()) + " bytes)");
  }
  return (std::uint32_t{b[pos]} << 24) | (std::uint32_t{b[pos + 1]} << 16) | (std::uint32_t{b[pos + 2]} << 8) |
         std::uint32_t{b[pos + 3]};
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

void expect_magic(std::uint32_t found, std::uint32_t expected, const char* what) {
  if (found != expected) {
    throw FormatError(std::string(what) + ": expected magic " + hex(expected) + ", found " + hex(found));
  }
}

std::filesystem::path find_first(const std::filesystem::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (std::filesystem::exists(dir / n)) return dir / n;
  }
  throw Error("none of the expected MNIST files (e.g. " + std::string(*names.begin()) + ") found in " + dir.string());
}

}  // namespace

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Dataset parse_idx(const std::vector<std::uint8_t>& image_bytes, const std::vector<std::uint8_t>& label_bytes) {
  expect_magic(read_be32(image_bytes, 0, "image file"), kIdxImageMagic, "image file");
  expect_magic(read_be32(label_bytes, 0, "label file"), kIdxLabelMagic, "label file");
  const std::size_t count = read_be32(image_bytes, 4, "image file");
  const std::size_t rows = read_be32(image_bytes, 8, "image file");
  const std::size_t cols = read_be32(image_bytes, 12, "image file");
  const std::size_t label_count = read_be32(label_bytes, 4, "label file");
  if (count != label_count) {
    throw FormatError("image file holds " + std::to_string(count) + " items, label file " + std::to_string(label_count));
  }
  const std::size_t pixels = rows * cols;
  if (image_bytes.size() < 16 + count * pixels) {
    throw LengthError("image file truncated: header announces " + std::to_string(count) + " images of " +
                      std::to_string(rows) + "x" + std::to_string(cols) + ", file has " +
                      std::to_string(image_bytes.size()) + " bytes");
  }
  if (label_bytes.size() < 8 + count) {
    throw LengthError("label file truncated: header announces " + std::to_string(count) + " labels, file has " +
                      std::to_string(label_bytes.size()) + " bytes");
  }

  Dataset ds;
  ds.name = "idx";
  ds.sample_shape = {1, rows, cols};
  ds.inputs.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(pixels));
  const std::uint8_t* src = image_bytes.data() + 16;
  for (std::size_t i = 0; i < count; ++i) {
    double* row = ds.inputs.row(static_cast<Eigen::Index>(i)).data();
    for (std::size_t p = 0; p < pixels; ++p) row[p] = static_cast<double>(src[i * pixels + p]) / 255.0;
  }
  ds.labels.reserve(count);
  int max_label = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const int l = label_bytes[8 + i];
    max_label = std::max(max_label, l);
    ds.labels.push_back(l);
  }
  ds.classes = std::max<std::size_t>(10, static_cast<std::size_t>(max_label) + 1);
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  Dataset ds = parse_idx(read_file(images), read_file(labels));
  ds.name = images.filename().string();
  return ds;
}

std::vector<std::uint8_t> encode_idx_images(const Dataset& ds) {
  if (ds.sample_shape.size() != 3 || ds.sample_shape[0] != 1) {
    throw ShapeError("IDX image encoding needs single-channel [1 x H x W] samples");
  }
  std::vector<std::uint8_t> out;
  out.reserve(16 + static_cast<std::size_t>(ds.inputs.size()));
  put_be32(out, kIdxImageMagic);
  put_be32(out, static_cast<std::uint32_t>(ds.size()));
  put_be32(out, static_cast<std::uint32_t>(ds.sample_shape[1]));
  put_be32(out, static_cast<std::uint32_t>(ds.sample_shape[2]));
  for (Eigen::Index r = 0; r < ds.inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < ds.inputs.cols(); ++c) {
      const double v = std::clamp(ds.inputs(r, c), 0.0, 1.0);
      out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const Dataset& ds) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + ds.size());
  put_be32(out, kIdxLabelMagic);
  put_be32(out, static_cast<std::uint32_t>(ds.size()));
  for (int l : ds.labels) out.push_back(static_cast<std::uint8_t>(l));
  return out;
}

MnistSplits load_mnist(const std::filesystem::path& dir) {
  MnistSplits s;
  s.train = load_idx(find_first(dir, {"train-images-idx3-ubyte", "train-images.idx3-ubyte"}),
                     find_first(dir, {"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"}));
  s.test = load_idx(find_first(dir, {"t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"}),
                    find_first(dir, {"t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"}));
  s.train.name = "mnist-train";
  s.test.name = "mnist-test";
  return s;
}

}  // namespace tg::data
