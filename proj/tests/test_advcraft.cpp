#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "tg/advcraft/fgsm.hpp"
#include "tg/dataio/synthetic.hpp"
#include "tg/errors.hpp"
#include "tg/ndnet/train.hpp"

using namespace tg;
using namespace tg::adv;

namespace {

const InputPerturbationConfig kNoClip{0.1, std::nullopt};

nn::Model linear_softmax(std::size_t in, std::size_t k, std::mt19937_64& rng) {
  nn::Model m = nn::ModelBuilder({in}).dense(k).build();
  testing::randomize(m, rng, 1.0);
  return m;
}

}  // namespace

TEST_CASE("zero budget returns the input exactly") {
  std::mt19937_64 rng(1);
  const nn::Model m = testing::small_model(1, rng);
  const auto x = testing::random_tensor(m.input_shape(), rng);
  const auto y = testing::random_distribution(m.output_size(), rng);
  CHECK(fgsm(m, nn::LossFunction::cross_entropy(), x, y, {0.0}) == x);
}

TEST_CASE("one-dimensional model with a positive input gradient steps up") {
  // c = (2x)^2 has dc/dx = 8x > 0 at x = 0.5
  nn::Model m = nn::ModelBuilder({1}).dense(1).build(nn::Head::identity);
  m.params().assign(std::vector<double>{2.0, 0.0});
  const auto out = fgsm(m, nn::LossFunction::mean_squared_error(), nn::Tensor({1}, {0.5}), {0.0}, {0.1});
  CHECK(out[0] == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("linear softmax model follows the closed-form gradient sign") {
  // d c / d x = W^T (p - y) for cross-entropy on a dense softmax layer with sum(y) = 1
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const nn::Model m = linear_softmax(6, 4, rng);
    const auto x = testing::random_tensor({6}, rng);
    const auto y = testing::random_distribution(4, rng);
    const auto p = nn::forward(m, x);
    const auto w = m.params().flat();
    const auto out = fgsm(m, nn::LossFunction::cross_entropy(), x, y, {0.05});
    for (std::size_t j = 0; j < 6; ++j) {
      double g = 0.0;
      for (std::size_t k = 0; k < 4; ++k) g += w[k * 6 + j] * (p[k] - y[k]);
      const double expected = std::clamp(x[j] + 0.05 * ((g > 0) - (g < 0)), 0.0, 1.0);
      CHECK(out[j] == doctest::Approx(expected).epsilon(1e-15));
    }
  }
}

TEST_CASE("fgsm respects the budget and the clip range") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const nn::Model m = testing::small_model(trial, rng);
    const auto x = testing::random_tensor(m.input_shape(), rng);
    const auto y = testing::random_distribution(m.output_size(), rng);
    const auto out = fgsm(m, nn::LossFunction::cross_entropy(), x, y, {0.3});
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(std::abs(out[i] - x[i]) <= 0.3 + 1e-15);
      CHECK(out[i] >= 0.0);
      CHECK(out[i] <= 1.0);
    }
  }
}

TEST_CASE("coordinates with zero gradient are left alone") {
  std::mt19937_64 rng(2);
  nn::Model m = linear_softmax(5, 3, rng);
  auto w = m.params().flat();
  for (std::size_t k = 0; k < 3; ++k) w[k * 5 + 2] = 0.0;  // input 2 never reaches the output
  const auto x = testing::random_tensor({5}, rng);
  const auto out = fgsm(m, nn::LossFunction::cross_entropy(), x, {0.2, 0.3, 0.5}, kNoClip);
  CHECK(out[2] == x[2]);
  for (std::size_t i : {0u, 1u, 3u, 4u}) CHECK(out[i] != x[i]);
}

TEST_CASE("unclipped perturbations scale with the budget") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const nn::Model m = testing::small_model(trial, rng);
    const auto x = testing::random_tensor(m.input_shape(), rng);
    const auto y = testing::random_distribution(m.output_size(), rng);
    const auto small = fgsm(m, nn::LossFunction::cross_entropy(), x, y, {0.01, std::nullopt});
    const auto large = fgsm(m, nn::LossFunction::cross_entropy(), x, y, {0.25, std::nullopt});
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK((large[i] - x[i]) == doctest::Approx(25.0 * (small[i] - x[i])).epsilon(1e-9));
    }
  }
}

TEST_CASE("batched fgsm equals the per-sample version") {
  std::mt19937_64 rng(6);
  const nn::Model m = testing::small_model(2, rng);
  nn::Matrix xs(3, static_cast<Eigen::Index>(m.input_size())), ys(3, static_cast<Eigen::Index>(m.output_size()));
  for (int r = 0; r < 3; ++r) {
    xs.row(r) = nn::as_row(testing::random_tensor(m.input_shape(), rng));
    const auto y = testing::random_distribution(m.output_size(), rng);
    for (std::size_t c = 0; c < y.size(); ++c) ys(r, static_cast<Eigen::Index>(c)) = y[c];
  }
  const auto batch = fgsm_batch(m, nn::LossFunction::cross_entropy(), xs, ys, {0.1});
  for (int r = 0; r < 3; ++r) {
    const auto single = fgsm(m, nn::LossFunction::cross_entropy(), nn::row_tensor(xs, r, m.input_shape()),
                             nn::to_distribution(ys, r), {0.1});
    CHECK(nn::as_row(single) == batch.row(r));
  }
}

TEST_CASE("self-transfer is at least as strong as clean evaluation") {
  auto ds = data::synthetic(3, 4, 60, 3.0, 8);
  nn::Model m = nn::ModelBuilder({4}).dense(8).relu().dense(3).build();
  m.initialize(3);
  nn::SgdState state;
  std::mt19937_64 rng(1);
  nn::train_epochs(m, nn::LossFunction::cross_entropy(), ds.inputs, nn::one_hot_rows(ds.labels, 3), {0.05, 0.9, 8},
                   state, 20, rng);
  const double clean = nn::accuracy(m, ds.inputs, ds.labels);
  const double attacked = transfer_attack_accuracy(m, m, ds, {0.5, std::nullopt});
  CHECK(attacked <= clean);
  CHECK(attacked >= 0.0);
  data::Dataset empty = ds.subset(std::vector<std::size_t>{});
  CHECK_THROWS_AS(transfer_attack_accuracy(m, m, empty, {0.5, std::nullopt}), EmptyInputError);
}

TEST_CASE("negative budgets are rejected") {
  CHECK_THROWS_AS(InputPerturbationConfig{-0.1}.validate(), ConfigError);
  std::mt19937_64 rng(1);
  const nn::Model m = testing::small_model(0, rng);
  CHECK_THROWS_AS(fgsm(m, nn::LossFunction::cross_entropy(), nn::Tensor(m.input_shape()),
                       nn::LabelDistribution(m.output_size(), 0.1), {-1.0}),
                  ConfigError);
}
