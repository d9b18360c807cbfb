#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>

#include "support.hpp"
#include "tg/dataio/synthetic.hpp"
#include "tg/errors.hpp"
#include "tg/ndnet/train.hpp"
#include "tg/theftsim/oracle.hpp"
#include "tg/theftsim/theft.hpp"
#include "tg/zoo/architecture.hpp"

using namespace tg;
using namespace tg::theft;

namespace {

struct Fixture {
  data::Dataset train = data::synthetic(10, 12, 30, 4.0, 1);
  data::Dataset pool = data::synthetic(10, 12, 20, 4.0, 2);
  std::shared_ptr<const nn::Model> target;

  Fixture() {
    nn::Model m = zoo::build(zoo::catalog().at('J'), {12}, 3);
    nn::SgdState state;
    std::mt19937_64 rng(4);
    nn::train_epochs(m, nn::LossFunction::cross_entropy(), train.inputs, nn::one_hot_rows(train.labels, 10),
                     {0.01, 0.9, 16}, state, 5, rng);
    target = std::make_shared<const nn::Model>(std::move(m));
  }
};

AugmentationConfig small_config() {
  AugmentationConfig cfg;
  cfg.rounds = 2;
  cfg.seed_count = 20;
  cfg.epochs_per_round = 2;
  cfg.clip_range = std::nullopt;
  return cfg;
}

}  // namespace

TEST_CASE("undefended oracle answers with the model outputs and counts queries") {
  Fixture f;
  const Oracle oracle(f.target);
  const nn::Matrix xs = f.pool.inputs.topRows(7);
  CHECK(oracle.query(xs) == nn::outputs(*f.target, xs));
  CHECK(oracle.query_count() == 7);
  oracle.query(f.pool.inputs.topRows(3));
  CHECK(oracle.query_count() == 10);
}

TEST_CASE("defended oracle stays within the step of the raw outputs") {
  Fixture f;
  const Oracle oracle(f.target, defense::OutputPerturbationConfig{0.003, defense::Renormalization::none});
  const nn::Matrix xs = f.pool.inputs.topRows(20);
  const nn::Matrix raw = nn::outputs(*f.target, xs);
  const nn::Matrix defended = oracle.query(xs);
  CHECK((defended - raw).cwiseAbs().maxCoeff() <= 0.003 + 1e-15);
  CHECK((defended - raw).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("oracle query count is exact under concurrent use") {
  Fixture f;
  const Oracle oracle(f.target);
  std::vector<std::thread> workers;
  for (int t = 0; t < 4; ++t) {
    workers.emplace_back([&] {
      for (int i = 0; i < 25; ++i) oracle.query(f.pool.inputs.topRows(3));
    });
  }
  for (auto& w : workers) w.join();
  CHECK(oracle.query_count() == 4 * 25 * 3);
}

TEST_CASE("oracle input checks") {
  Fixture f;
  CHECK_THROWS_AS(Oracle(nullptr), ConfigError);
  const Oracle oracle(f.target);
  CHECK_THROWS_AS(oracle.query(nn::Matrix::Zero(2, 5)), ShapeError);
}

TEST_CASE("jacobian augmentation with zero step copies the inputs") {
  Fixture f;
  const nn::Matrix xs = f.pool.inputs.topRows(5);
  CHECK(jacobian_augment(*f.target, xs, 0.0, std::nullopt) == xs);
}

TEST_CASE("constant substitute leaves the inputs in place") {
  const nn::Model flat = nn::ModelBuilder({4}).dense(3).build();
  std::mt19937_64 rng(1);
  nn::Matrix xs = nn::as_row(testing::random_tensor({4}, rng));
  CHECK(jacobian_augment(flat, xs, 0.1) == xs);
}

TEST_CASE("one-dimensional substitute with a rising top class moves up") {
  // z = (x, -x): class 0 wins for x > 0 and p_0 increases with x
  nn::Model m = nn::ModelBuilder({1}).dense(2).build();
  m.params().assign(std::vector<double>{1.0, -1.0, 0.0, 0.0});
  nn::Matrix xs(2, 1);
  xs << 0.3, 0.95;
  const auto out = jacobian_augment(m, xs, 0.1);
  CHECK(out(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(out(1, 0) == 1.0);  // clipped
  const auto unclipped = jacobian_augment(m, xs, 0.1, std::nullopt);
  CHECK(unclipped(1, 0) == doctest::Approx(1.05).epsilon(1e-15));
}

TEST_CASE("jacobian step follows the sign of the top-class probability gradient") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 5; ++trial) {
    nn::Model m = testing::small_model(trial, rng);
    const auto x = testing::smooth_input(m, rng);
    const auto p = nn::forward(m, x);
    const std::size_t c = nn::argmax(p);
    const auto fd = testing::central_difference(
        [&](const std::vector<double>& v) { return nn::forward(m, nn::Tensor(x.shape(), v))[c]; }, x.values());
    const auto out = jacobian_augment(m, nn::as_row(x), 0.1, std::nullopt);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (std::abs(fd[i]) < 1e-8) continue;
      CHECK(out(0, static_cast<Eigen::Index>(i)) == doctest::Approx(x[i] + 0.1 * (fd[i] > 0 ? 1 : -1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("theft grows the dataset by doubling and counts every query") {
  Fixture f;
  const Oracle oracle(f.target);
  const auto cfg = small_config();
  const auto result = run_theft(oracle, zoo::catalog().at('I'), f.pool, cfg, 9, &f.train);
  REQUIRE(result.rounds.size() == 3);
  for (std::size_t r = 0; r < 3; ++r) {
    CHECK(result.rounds[r].dataset_size == 20u << r);
    CHECK(result.rounds[r].accuracy.has_value());
    CHECK(result.rounds[r].mean_grad_norm > 0.0);
  }
  CHECK(result.queries == 20 + 20 + 40);
  CHECK(oracle.query_count() == result.queries);
  CHECK(result.seed_indices == seed_indices(f.pool, 20, 9));
  std::vector<int> per(10, 0);
  for (auto i : result.seed_indices) ++per[static_cast<std::size_t>(f.pool.labels[i])];
  CHECK(per == std::vector<int>(10, 2));
}

TEST_CASE("zero rounds trains on the seeds only") {
  Fixture f;
  const Oracle oracle(f.target);
  auto cfg = small_config();
  cfg.rounds = 0;
  const auto result = run_theft(oracle, zoo::catalog().at('I'), f.pool, cfg, 9);
  REQUIRE(result.rounds.size() == 1);
  CHECK(result.rounds[0].dataset_size == 20);
  CHECK(result.queries == 20);
  CHECK_FALSE(result.rounds[0].accuracy.has_value());
}

TEST_CASE("theft is deterministic in its seed") {
  Fixture f;
  const Oracle oracle(f.target);
  const auto cfg = small_config();
  const auto a = run_theft(oracle, zoo::catalog().at('J'), f.pool, cfg, 5);
  const auto b = run_theft(oracle, zoo::catalog().at('J'), f.pool, cfg, 5);
  const auto c = run_theft(oracle, zoo::catalog().at('J'), f.pool, cfg, 6);
  CHECK(a.substitute.params() == b.substitute.params());
  CHECK_FALSE(a.substitute.params() == c.substitute.params());
}

TEST_CASE("substitutes learn from an undefended oracle") {
  Fixture f;
  const Oracle oracle(f.target);
  auto cfg = small_config();
  cfg.rounds = 3;
  cfg.epochs_per_round = 10;
  const auto result = run_theft(oracle, zoo::catalog().at('I'), f.pool, cfg, 1, &f.train);
  CHECK(*result.rounds.back().accuracy > 0.5);
}

TEST_CASE("augmentation config validation") {
  Fixture f;
  const Oracle oracle(f.target);
  auto cfg = small_config();
  cfg.rounds = -1;
  CHECK_THROWS_AS(cfg.validate(10), ConfigError);
  cfg = small_config();
  cfg.lambda = 0.0;
  CHECK_THROWS_AS(cfg.validate(10), ConfigError);
  cfg = small_config();
  cfg.seed_count = 9;
  CHECK_THROWS_AS(cfg.validate(10), ConfigError);
  cfg = small_config();
  cfg.seed_count = 300;
  CHECK_THROWS_AS(run_theft(oracle, zoo::catalog().at('I'), f.pool, cfg, 1), ConfigError);
}

TEST_CASE("derived seeds are distinct streams") {
  CHECK(derive_seed(7, 1) != derive_seed(7, 2));
  CHECK(derive_seed(7, 1) != derive_seed(8, 1));
  CHECK(derive_seed(7, 1) == derive_seed(7, 1));
}
