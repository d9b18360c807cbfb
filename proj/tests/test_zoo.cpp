#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <random>

#include "tg/errors.hpp"
#include "tg/ndnet/gradients.hpp"
#include "tg/ndnet/train.hpp"
#include "tg/zoo/architecture.hpp"
#include "tg/zoo/checkpoint.hpp"

using namespace tg;
using namespace tg::zoo;

namespace {

const nn::Shape kMnist{1, 28, 28};

// Substitute architectures: conv widths, then FC widths, then a 10-way softmax.
struct Row {
  char id;
  std::vector<std::size_t> conv;
  std::vector<std::size_t> fc;
};

const std::vector<Row> kTable = {
    {'X', {64, 128}, {}},         {'Y', {64, 128, 128}, {}},      {'A', {32, 64}, {200, 200}},
    {'F', {32, 64}, {200}},       {'G', {32, 64}, {}},            {'H', {32}, {200, 200}},
    {'I', {}, {200, 200, 200}},   {'J', {}, {1000, 200}},         {'K', {}, {1000, 500, 200}},
    {'L', {32}, {1000, 200}},
};

std::size_t trainable_layers(const ArchitectureSpec& s) {
  std::size_t n = 0;
  for (const auto& l : s.layers) n += l.kind != LayerKind::global_avg_pool;
  return n;
}

}  // namespace

TEST_CASE("catalog reproduces the substitute architecture table") {
  REQUIRE(catalog().size() == kTable.size());
  for (const auto& row : kTable) {
    CAPTURE(row.id);
    std::vector<LayerSpec> expected;
    for (auto w : row.conv) expected.push_back({LayerKind::conv, w});
    for (auto w : row.fc) expected.push_back({LayerKind::fully_connected, w});
    expected.push_back({LayerKind::softmax, 10});
    CHECK(catalog().at(row.id).layers == expected);
  }
}

TEST_CASE("catalog spot checks") {
  using K = LayerKind;
  CHECK(catalog().at('X').layers == std::vector<LayerSpec>{{K::conv, 64}, {K::conv, 128}, {K::softmax, 10}});
  CHECK(catalog().at('I').layers ==
        std::vector<LayerSpec>{{K::fully_connected, 200}, {K::fully_connected, 200}, {K::fully_connected, 200},
                               {K::softmax, 10}});
  CHECK(catalog().at('L').layers ==
        std::vector<LayerSpec>{{K::conv, 32}, {K::fully_connected, 1000}, {K::fully_connected, 200}, {K::softmax, 10}});
}

TEST_CASE("every catalog spec ends in a 10-way softmax with convolutions first") {
  for (const auto& [id, spec] : catalog()) {
    CHECK(spec.classes() == 10);
    CHECK_NOTHROW(validate(spec));
    bool seen_fc = false;
    for (const auto& l : spec.layers) {
      if (l.kind == LayerKind::fully_connected) seen_fc = true;
      if (l.kind == LayerKind::conv) CHECK_FALSE(seen_fc);
    }
  }
}

TEST_CASE("defender is three convolutions, global pooling and softmax") {
  const auto d = defender_spec();
  CHECK(d.id == kDefenderId);
  CHECK(d.layers == std::vector<LayerSpec>{{LayerKind::conv, 32},
                                           {LayerKind::conv, 64},
                                           {LayerKind::conv, 128},
                                           {LayerKind::global_avg_pool, 0},
                                           {LayerKind::softmax, 10}});
  CHECK(find_spec('D') == d);
  CHECK_THROWS_AS(find_spec('Q'), ConfigError);
}

TEST_CASE("validate rejects malformed specs") {
  CHECK_THROWS_AS(validate({'?', {{LayerKind::fully_connected, 10}, {LayerKind::conv, 8}, {LayerKind::softmax, 10}}}),
                  ConfigError);
  CHECK_THROWS_AS(validate({'?', {{LayerKind::conv, 8}}}), ConfigError);
  CHECK_THROWS_AS(validate({'?', {{LayerKind::softmax, 10}, {LayerKind::fully_connected, 4}}}), ConfigError);
}

TEST_CASE("built models have the expected parameter counts") {
  // X: conv 1->64 (640), conv 64->128 (73856), two pools 28 -> 7, dense 128*49 -> 10 (62730)
  CHECK(build(catalog().at('X'), kMnist, 1).params().size() == 640 + 73856 + 62730);
  // I: 784*200+200, 200*200+200 twice, 200*10+10
  CHECK(build(catalog().at('I'), kMnist, 1).params().size() == 157000 + 40200 + 40200 + 2010);
  // defender: 320 + 18496 + 73856 + 1290
  CHECK(build(defender_spec(), kMnist, 1).params().size() == 320 + 18496 + 73856 + 1290);
}

TEST_CASE("every spec builds, trains a step and round-trips through a checkpoint") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  nn::Matrix xs(4, 784), ys = nn::Matrix::Zero(4, 10);
  for (Eigen::Index i = 0; i < xs.size(); ++i) xs.data()[i] = u(rng);
  for (int r = 0; r < 4; ++r) ys(r, r) = 1.0;

  auto specs = std::vector<ArchitectureSpec>{defender_spec()};
  for (const auto& [id, spec] : catalog()) specs.push_back(spec);
  for (const auto& spec : specs) {
    CAPTURE(spec.id);
    nn::Model m = build(spec, kMnist, 11);
    CHECK(m.arch_id() == spec.id);
    CHECK(m.output_size() == 10);
    CHECK(m.params().size() > 0);
    CHECK(m.params().segments().size() == trainable_layers(spec));
    CHECK(build(spec, kMnist, 11).params() == m.params());

    nn::SgdState state;
    const auto before = m.params();
    const auto step = nn::train_step(m, nn::LossFunction::cross_entropy(), xs, ys, {0.01, 0.9, 4}, state);
    CHECK(std::isfinite(step.loss));
    CHECK_FALSE(m.params() == before);

    const nn::Model back = decode_checkpoint(encode_checkpoint(m));
    CHECK(back.params() == m.params());
    CHECK(back.input_shape() == m.input_shape());
    CHECK(back.arch_id() == spec.id);
  }
}

TEST_CASE("conv specs cannot be built on flat inputs") {
  CHECK_THROWS_AS(build(catalog().at('A'), {784}, 1), ShapeError);
  CHECK_NOTHROW(build(catalog().at('I'), {784}, 1));
}

TEST_CASE("checkpoint layout") {
  const nn::Model m = build(catalog().at('J'), kMnist, 5);
  const auto bytes = encode_checkpoint(m);
  REQUIRE(bytes.size() == 4 + 4 + 1 + 4 + 3 * 4 + 8 + 8 * m.params().size());
  CHECK(std::memcmp(bytes.data(), "TGMD", 4) == 0);
  CHECK(bytes[4] == 1);
  CHECK(bytes[5] == 0);
  CHECK(bytes[8] == 'J');
  CHECK(bytes[9] == 3);
  CHECK(bytes[17] == 28);
  const std::size_t n = m.params().size();
  for (int b = 0; b < 8; ++b) CHECK(bytes[25 + b] == static_cast<std::uint8_t>(n >> (8 * b)));
  double first = 0.0;
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[33 + b]) << (8 * b);
  std::memcpy(&first, &bits, 8);
  CHECK(first == m.params().flat()[0]);
}

TEST_CASE("corrupt checkpoints are rejected") {
  const auto good = encode_checkpoint(build(catalog().at('G'), kMnist, 5));

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(bad_magic), FormatError);

  auto bad_version = good;
  bad_version[4] = 2;
  CHECK_THROWS_AS(decode_checkpoint(bad_version), FormatError);

  auto truncated = good;
  truncated.resize(truncated.size() - 3);
  CHECK_THROWS_AS(decode_checkpoint(truncated), LengthError);
  CHECK_THROWS_AS(decode_checkpoint({}), LengthError);

  auto trailing = good;
  trailing.push_back(0);
  CHECK_THROWS_AS(decode_checkpoint(trailing), FormatError);

  auto wrong_arch = good;
  wrong_arch[8] = 'X';
  CHECK_THROWS_AS(decode_checkpoint(wrong_arch), FormatError);
}

TEST_CASE("checkpoint files round-trip") {
  const auto path = std::filesystem::temp_directory_path() / "tg_zoo_test.tgm";
  const nn::Model m = build(defender_spec(), kMnist, 2);
  save_checkpoint(m, path);
  CHECK(load_checkpoint(path).params() == m.params());
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}
