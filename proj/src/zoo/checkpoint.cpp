#include "tg/zoo/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tg/errors.hpp"
#include "tg/zoo/architecture.hpp"

namespace tg::zoo {
namespace {

constexpr char kMagic[4] = {'T', 'G', 'M', 'D'};

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  template <class T>
  T get_le() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    need(sizeof(U));
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= static_cast<U>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  std::uint8_t get_byte() {
    need(1);
    return bytes_[pos_++];
  }

  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw LengthError("checkpoint truncated at byte " + std::to_string(pos_) + " (needs " + std::to_string(n) +
                        " more)");
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const nn::Model& model) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, kCheckpointVersion);
  out.push_back(static_cast<std::uint8_t>(model.arch_id()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.input_shape().size()));
  for (auto d : model.input_shape()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(model.params().size()));
  out.reserve(out.size() + 8 * model.params().size());
  for (double v : model.params().flat()) put_le<double>(out, v);
  return out;
}

nn::Model decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  r.need(4);
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("not a model checkpoint: bad magic bytes");
  for (int i = 0; i < 4; ++i) r.get_byte();
  const auto version = r.get_le<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                      std::to_string(kCheckpointVersion) + ")");
  }
  const char id = static_cast<char>(r.get_byte());
  const auto rank = r.get_le<std::uint32_t>();
  if (rank == 0 || rank > 8) throw FormatError("implausible input rank " + std::to_string(rank));
  nn::Shape shape;
  for (std::uint32_t i = 0; i < rank; ++i) shape.push_back(r.get_le<std::uint32_t>());
  const auto count = r.get_le<std::uint64_t>();

  nn::Model model = build(find_spec(id), shape, 0);
  if (count != model.params().size()) {
    throw FormatError("checkpoint holds " + std::to_string(count) + " parameters, architecture '" + std::string(1, id) +
                      "' needs " + std::to_string(model.params().size()));
  }
  r.need(8 * count);
  std::vector<double> values(count);
  for (auto& v : values) v = r.get_le<double>();
  if (r.remaining() != 0) throw FormatError("trailing bytes after checkpoint parameters");
  model.params().assign(values);
  return model;
}

void save_checkpoint(const nn::Model& model, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

nn::Model load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace tg::zoo
