#pragma once

#include "tg/ndnet/model.hpp"

namespace tg::nn {

enum class LossKind { cross_entropy, mean_squared_error };

/// Per-sample cost c(output, target).
///
/// cross_entropy:      c = -sum_i y_i * log(p_i + stability_epsilon), soft targets allowed
/// mean_squared_error: c = (1/K) * sum_i (o_i - y_i)^2
struct LossFunction {
  LossKind kind = LossKind::cross_entropy;
  double stability_epsilon = 1e-12;

  static LossFunction cross_entropy() { return {LossKind::cross_entropy, 1e-12}; }
  static LossFunction mean_squared_error() { return {LossKind::mean_squared_error, 1e-12}; }
};

/// Loss of each row of `outputs` (head outputs) against each row of `targets`.
Vector loss_values(const LossFunction& loss, const Matrix& outputs, const Matrix& targets);

/// d c / d logits for each row (not averaged over the batch).
Matrix loss_logit_grad(const LossFunction& loss, Head head, const Matrix& outputs, const Matrix& targets);

}  // namespace tg::nn
