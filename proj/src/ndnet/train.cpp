#include "tg/ndnet/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tg/errors.hpp"

namespace tg::nn {

StepResult train_step(Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys, const SgdConfig& cfg,
                      SgdState& state) {
  if (xs.rows() != ys.rows()) throw ShapeError("batch inputs and targets differ in length");
  if (xs.rows() == 0) throw EmptyInputError("empty training batch");
  const auto bg = grad_params_batch(model, loss, xs, ys);
  const std::size_t step = state.step++;
  const double norm = bg.grad.norm();
  if (!std::isfinite(bg.loss) || !std::isfinite(norm)) throw DivergenceError(step, bg.loss);

  auto theta = model.params().as_eigen();
  if (state.velocity.size() != static_cast<std::size_t>(theta.size())) state.velocity.assign(static_cast<std::size_t>(theta.size()), 0.0);
  Eigen::Map<Vector> v(state.velocity.data(), theta.size());
  v = cfg.momentum * v - cfg.learning_rate * bg.grad.as_eigen();
  theta += v;
  return {bg.loss, norm};
}

EpochStats train_epochs(Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys, const SgdConfig& cfg,
                        SgdState& state, std::size_t epochs, std::mt19937_64& rng) {
  if (xs.rows() != ys.rows()) throw ShapeError("training inputs and targets differ in length");
  if (xs.rows() == 0) throw EmptyInputError("empty training set");
  const auto n = static_cast<std::size_t>(xs.rows());
  const std::size_t batch = std::max<std::size_t>(cfg.batch_size, 1);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  EpochStats stats;
  Matrix bx, by;
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += batch) {
      const std::size_t count = std::min(batch, n - start);
      bx.resize(static_cast<Eigen::Index>(count), xs.cols());
      by.resize(static_cast<Eigen::Index>(count), ys.cols());
      for (std::size_t i = 0; i < count; ++i) {
        bx.row(static_cast<Eigen::Index>(i)) = xs.row(order[start + i]);
        by.row(static_cast<Eigen::Index>(i)) = ys.row(order[start + i]);
      }
      const auto r = train_step(model, loss, bx, by, cfg, state);
      stats.mean_loss += r.loss;
      stats.mean_grad_norm += r.grad_norm;
      ++stats.steps;
    }
  }
  if (stats.steps) {
    stats.mean_loss /= static_cast<double>(stats.steps);
    stats.mean_grad_norm /= static_cast<double>(stats.steps);
  }
  return stats;
}

}  // namespace tg::nn
