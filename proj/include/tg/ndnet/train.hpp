#pragma once

#include <cstdint>
#include <random>

#include "tg/ndnet/gradients.hpp"

namespace tg::nn {

struct SgdConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 32;
};

/// Momentum buffer and global step counter. Empty velocity is sized lazily.
struct SgdState {
  std::vector<double> velocity;
  std::size_t step = 0;
};

struct StepResult {
  double loss = 0.0;
  double grad_norm = 0.0;  ///< L2 norm of the batch-mean parameter gradient
};

/// One momentum-SGD update on a minibatch: v <- mu v - lr g; theta <- theta + v.
/// Throws DivergenceError (carrying the step index) when the loss is not finite.
StepResult train_step(Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys, const SgdConfig& cfg,
                      SgdState& state);

struct EpochStats {
  double mean_loss = 0.0;
  double mean_grad_norm = 0.0;
  std::size_t steps = 0;
};

/// Shuffled minibatch passes over (xs, ys); the shuffle draws from `rng`.
EpochStats train_epochs(Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys, const SgdConfig& cfg,
                        SgdState& state, std::size_t epochs, std::mt19937_64& rng);

}  // namespace tg::nn
