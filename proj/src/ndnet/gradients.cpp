#include "tg/ndnet/gradients.hpp"

#include <algorithm>

#include "tg/errors.hpp"

namespace tg::nn {
namespace {

void check_input(const Model& model, const Tensor& x) {
  if (x.shape() != model.input_shape()) {
    throw ShapeError("input shape " + shape_string(x.shape()) + " does not match model input " +
                     shape_string(model.input_shape()));
  }
}

void check_target(const Model& model, const LabelDistribution& y) {
  if (y.size() != model.output_size()) {
    throw ShapeError("target has " + std::to_string(y.size()) + " classes, model emits " +
                     std::to_string(model.output_size()));
  }
}

Matrix target_row(const LabelDistribution& y) {
  Matrix m(1, static_cast<Eigen::Index>(y.size()));
  std::copy(y.begin(), y.end(), m.data());
  return m;
}

}  // namespace

LabelDistribution forward(const Model& model, const Tensor& x) {
  check_input(model, x);
  return to_distribution(outputs(model, as_row(x)), 0);
}

ParameterVector grad_params(const Model& model, const LossFunction& loss, const Tensor& x, const LabelDistribution& y) {
  check_input(model, x);
  check_target(model, y);
  const auto trace = forward_trace(model, as_row(x));
  const Matrix d_logits = loss_logit_grad(loss, model.head(), head_outputs(model, trace.logits()), target_row(y));
  const auto back = backward(model, trace, d_logits, false, ParamGradMode::sum);
  ParameterVector g = model.params().zeros_like();
  g.assign(std::span<const double>(back.param_grads.data(), static_cast<std::size_t>(back.param_grads.size())));
  return g;
}

Tensor grad_input(const Model& model, const LossFunction& loss, const Tensor& x, const LabelDistribution& y) {
  check_input(model, x);
  check_target(model, y);
  return row_tensor(grad_input_batch(model, loss, as_row(x), target_row(y)), 0, x.shape());
}

Matrix grad_input_batch(const Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys) {
  const auto trace = forward_trace(model, xs);
  const Matrix d_logits = loss_logit_grad(loss, model.head(), head_outputs(model, trace.logits()), ys);
  return backward(model, trace, d_logits, true, ParamGradMode::none).input_grad;
}

BatchGradient grad_params_batch(const Model& model, const LossFunction& loss, const Matrix& xs, const Matrix& ys) {
  const auto trace = forward_trace(model, xs);
  const Matrix out = head_outputs(model, trace.logits());
  const double inv_n = 1.0 / static_cast<double>(xs.rows());
  const Matrix d_logits = loss_logit_grad(loss, model.head(), out, ys) * inv_n;
  const auto back = backward(model, trace, d_logits, false, ParamGradMode::sum);
  BatchGradient result{model.params().zeros_like(), loss_values(loss, out, ys).mean()};
  result.grad.assign(std::span<const double>(back.param_grads.data(), static_cast<std::size_t>(back.param_grads.size())));
  return result;
}

ClassScoreGradients class_score_gradients(const Model& model, const Tensor& x) {
  if (model.head() != Head::softmax) throw UnsupportedHeadError("per-class log-probability gradients need a softmax head");
  check_input(model, x);
  const auto trace = forward_trace(model, as_row(x));
  const Matrix p = softmax_rows(trace.logits());
  const auto k = p.cols();
  // d log p_i / dz = e_i - p
  Matrix d_logits = -p.replicate(k, 1);
  d_logits.diagonal().array() += 1.0;
  const auto back = backward(model, trace, d_logits, false, ParamGradMode::per_sample);

  ClassScoreGradients result;
  result.probabilities = to_distribution(p, 0);
  result.grads.reserve(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    ParameterVector u = model.params().zeros_like();
    u.assign(std::span<const double>(back.param_grads.row(i).data(), static_cast<std::size_t>(back.param_grads.cols())));
    result.grads.push_back(std::move(u));
  }
  return result;
}

std::vector<ParameterVector> per_class_log_prob_grads(const Model& model, const Tensor& x) {
  return class_score_gradients(model, x).grads;
}

Matrix outputs_chunked(const Model& model, const Matrix& xs, std::size_t batch_size) {
  Matrix result(xs.rows(), static_cast<Eigen::Index>(model.output_size()));
  const auto chunk = static_cast<Eigen::Index>(std::max<std::size_t>(batch_size, 1));
  for (Eigen::Index start = 0; start < xs.rows(); start += chunk) {
    const Eigen::Index n = std::min(chunk, xs.rows() - start);
    result.middleRows(start, n) = outputs(model, xs.middleRows(start, n));
  }
  return result;
}

double accuracy(const Model& model, const Matrix& xs, const std::vector<int>& labels, std::size_t batch_size) {
  if (static_cast<std::size_t>(xs.rows()) != labels.size()) throw ShapeError("label count does not match inputs");
  if (labels.empty()) throw EmptyInputError("accuracy of an empty set");
  const Matrix out = outputs_chunked(model, xs, batch_size);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    Eigen::Index best = 0;
    out.row(r).maxCoeff(&best);
    if (best == labels[static_cast<std::size_t>(r)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace tg::nn
