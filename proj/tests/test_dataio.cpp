#include <doctest.h>

#include <cmath>
#include <set>

#include "tg/dataio/dataset.hpp"
#include "tg/dataio/idx.hpp"
#include "tg/dataio/synthetic.hpp"
#include "tg/errors.hpp"
#include "tg/ndnet/gradients.hpp"
#include "tg/ndnet/train.hpp"

using namespace tg;
using namespace tg::data;

namespace {

std::vector<std::uint8_t> be32(std::uint32_t v) {
  return {static_cast<std::uint8_t>(v >> 24), static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8),
          static_cast<std::uint8_t>(v)};
}

std::vector<std::uint8_t> concat(std::initializer_list<std::vector<std::uint8_t>> parts) {
  std::vector<std::uint8_t> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Two 2x3 images and their labels.
const auto kImages = concat({be32(0x803), be32(2), be32(2), be32(3), {0, 51, 255, 102, 204, 1}, {7, 8, 9, 10, 11, 12}});
const auto kLabels = concat({be32(0x801), be32(2), {3, 9}});

Dataset labelled(std::vector<int> labels, std::size_t classes) {
  Dataset ds;
  ds.name = "toy";
  ds.sample_shape = {1};
  ds.classes = classes;
  ds.inputs.resize(static_cast<Eigen::Index>(labels.size()), 1);
  for (std::size_t i = 0; i < labels.size(); ++i) ds.inputs(static_cast<Eigen::Index>(i), 0) = static_cast<double>(i);
  ds.labels = std::move(labels);
  return ds;
}

}  // namespace

TEST_CASE("parse_idx decodes big-endian headers and scales pixels") {
  const Dataset ds = parse_idx(kImages, kLabels);
  CHECK(ds.size() == 2);
  CHECK(ds.sample_shape == nn::Shape{1, 2, 3});
  CHECK(ds.labels == std::vector<int>{3, 9});
  CHECK(ds.inputs(0, 1) == 51.0 / 255.0);
  CHECK(ds.inputs(0, 2) == 1.0);
  CHECK(ds.inputs(1, 5) == 12.0 / 255.0);
  CHECK_NOTHROW(ds.validate());
}

TEST_CASE("re-encoding a parsed IDX pair reproduces the bytes") {
  const Dataset ds = parse_idx(kImages, kLabels);
  CHECK(encode_idx_images(ds) == kImages);
  CHECK(encode_idx_labels(ds) == kLabels);
}

TEST_CASE("IDX format errors") {
  SUBCASE("image file given as labels") { CHECK_THROWS_AS(parse_idx(kImages, kImages), FormatError); }
  SUBCASE("label file given as images") { CHECK_THROWS_AS(parse_idx(kLabels, kLabels), FormatError); }
  SUBCASE("empty file") {
    CHECK_THROWS_AS(parse_idx({}, kLabels), LengthError);
    CHECK_THROWS_AS(parse_idx(kImages, {}), LengthError);
  }
  SUBCASE("truncated pixels") {
    auto short_images = kImages;
    short_images.pop_back();
    CHECK_THROWS_AS(parse_idx(short_images, kLabels), LengthError);
  }
  SUBCASE("count mismatch") {
    const auto one_label = concat({be32(0x801), be32(1), {3}});
    CHECK_THROWS_AS(parse_idx(kImages, one_label), FormatError);
  }
}

TEST_CASE("magic mismatch message names both values") {
  try {
    parse_idx(kImages, kImages);
    FAIL("expected a format error");
  } catch (const FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("0x00000801") != std::string::npos);
    CHECK(msg.find("0x00000803") != std::string::npos);
  }
}

TEST_CASE("dataset validation") {
  Dataset ds = labelled({0, 1, 2}, 3);
  CHECK_NOTHROW(ds.validate(false));
  CHECK_THROWS_AS(ds.validate(true), ConfigError);  // inputs 0, 1, 2 leave [0, 1]
  ds.labels[1] = 3;
  CHECK_THROWS_AS(ds.validate(false), ConfigError);
  ds.labels.pop_back();
  CHECK_THROWS_AS(ds.validate(false), ShapeError);
}

TEST_CASE("split is a disjoint, exhaustive, stratified partition") {
  std::vector<int> labels;
  for (int i = 0; i < 103; ++i) labels.push_back(i % 7 == 0 ? 2 : i % 3 == 0 ? 1 : 0);
  const Dataset ds = labelled(labels, 3);
  const std::vector<double> fractions{0.5, 0.3, 0.2};
  const auto parts = split(ds, fractions, 5);
  REQUIRE(parts.size() == 3);

  std::multiset<double> seen;
  for (const auto& p : parts) {
    for (Eigen::Index r = 0; r < p.inputs.rows(); ++r) seen.insert(p.inputs(r, 0));
  }
  CHECK(seen.size() == ds.size());
  CHECK(std::set<double>(seen.begin(), seen.end()).size() == ds.size());

  const auto total = ds.class_counts();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto counts = parts[k].class_counts();
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(std::abs(static_cast<double>(counts[c]) - fractions[k] * static_cast<double>(total[c])) <= 1.0);
    }
  }

  const auto again = split(ds, fractions, 5);
  for (std::size_t k = 0; k < parts.size(); ++k) CHECK(again[k].labels == parts[k].labels);
  CHECK_THROWS_AS(split(ds, std::vector<double>{0.5, 0.4}, 5), ConfigError);
}

TEST_CASE("stratified helpers") {
  const Dataset ds = labelled({0, 0, 0, 0, 1, 1, 1, 1, 2, 2}, 3);
  const auto half = stratified_subset(ds, 0.5, 1);
  CHECK(half.size() == 5);
  const auto picked = stratified_pick(ds.labels, 3, 6, 9);
  CHECK(picked.size() == 6);
  std::vector<int> per(3, 0);
  for (auto i : picked) ++per[static_cast<std::size_t>(ds.labels[i])];
  CHECK(per == std::vector<int>{2, 2, 2});
  CHECK(stratified_pick(ds.labels, 3, 6, 9) == picked);
  CHECK_THROWS_AS(stratified_pick(ds.labels, 3, 9, 9), ConfigError);
}

TEST_CASE("synthetic blobs are deterministic and correctly placed") {
  const Dataset a = synthetic(4, 6, 3000, 5.0, 42);
  const Dataset b = synthetic(4, 6, 3000, 5.0, 42);
  CHECK(a.inputs == b.inputs);
  CHECK(a.labels == b.labels);
  CHECK(a.size() == 12000);
  CHECK_FALSE(synthetic(4, 6, 3000, 5.0, 43).inputs == a.inputs);

  std::vector<nn::Vector> means(4, nn::Vector::Zero(6));
  for (std::size_t i = 0; i < a.size(); ++i) means[static_cast<std::size_t>(a.labels[i])] += a.inputs.row(static_cast<Eigen::Index>(i)).transpose();
  for (auto& m : means) m /= 3000.0;
  // standard error of each mean coordinate is 1/sqrt(3000) ~ 0.018
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t j = i + 1; j < 4; ++j) CHECK((means[i] - means[j]).norm() == doctest::Approx(5.0).epsilon(0.03));
  }
}

TEST_CASE("zero separation leaves the classes indistinguishable") {
  const Dataset ds = synthetic(3, 5, 4000, 0.0, 7);
  nn::Vector overall = ds.inputs.colwise().mean().transpose();
  std::vector<nn::Vector> means(3, nn::Vector::Zero(5));
  for (std::size_t i = 0; i < ds.size(); ++i) means[static_cast<std::size_t>(ds.labels[i])] += ds.inputs.row(static_cast<Eigen::Index>(i)).transpose();
  for (auto& m : means) CHECK((m / 4000.0 - overall).cwiseAbs().maxCoeff() < 0.08);
}

TEST_CASE("well separated blobs are linearly separable") {
  const Dataset ds = synthetic(4, 4, 200, 10.0, 3);
  nn::Model m = nn::ModelBuilder({4}).dense(4).build();
  m.initialize(1);
  nn::SgdState state;
  std::mt19937_64 rng(2);
  nn::train_epochs(m, nn::LossFunction::cross_entropy(), ds.inputs, nn::one_hot_rows(ds.labels, 4),
                   {0.01, 0.9, 16}, state, 10, rng);
  CHECK(nn::accuracy(m, ds.inputs, ds.labels) >= 0.99);
}
