#pragma once

#include <vector>

#include "tg/ndnet/loss.hpp"
#include "tg/ndnet/model.hpp"

namespace tg::nn {

/// Model output F(x) for a single sample.
LabelDistribution forward(const Model& model, const Tensor& x);

/// Gradient of c(F_theta(x), y) with respect to theta.
ParameterVector grad_params(const Model& model, const LossFunction& loss, const Tensor& x, const LabelDistribution& y);

/// Gradient of c(F(x), y) with respect to x.
Tensor grad_input(const Model& model, const LossFunction& loss, const Tensor& x, const LabelDistribution& y);

/// Per-row input gradients for a batch (row i uses target row i).
Matrix grad_input_batch(const Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys);

/// Gradient of the batch-mean loss with respect to theta, plus the mean loss.
struct BatchGradient {
  ParameterVector grad;
  double loss = 0.0;
};
BatchGradient grad_params_batch(const Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys);

/// u_i = grad_theta log p_i(x; theta) for every class i, via one reverse pass per
/// class through a shared forward trace. Requires a softmax head.
std::vector<ParameterVector> per_class_log_prob_grads(const Model& model, const Tensor& x);

/// Same as per_class_log_prob_grads, also returning the softmax output p(x).
struct ClassScoreGradients {
  LabelDistribution probabilities;
  std::vector<ParameterVector> grads;
};
ClassScoreGradients class_score_gradients(const Model& model, const Tensor& x);

/// Fraction of rows whose argmax output equals `labels[i]`.
double accuracy(const Model& model, const Matrix& xs, const std::vector<int>& labels, std::size_t batch_size = 128);

/// Outputs for many rows, evaluated in chunks.
Matrix outputs_chunked(const Model& model, const Matrix& xs, std::size_t batch_size = 128);

}  // namespace tg::nn
