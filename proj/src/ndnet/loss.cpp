#include "tg/ndnet/loss.hpp"

#include "tg/errors.hpp"

namespace tg::nn {
namespace {

void check_targets(const Matrix& outputs, const Matrix& targets) {
  if (outputs.rows() != targets.rows() || outputs.cols() != targets.cols()) {
    throw ShapeError("targets are " + std::to_string(targets.rows()) + "x" + std::to_string(targets.cols()) +
                     ", outputs are " + std::to_string(outputs.rows()) + "x" + std::to_string(outputs.cols()));
  }
}

}  // namespace

Vector loss_values(const LossFunction& loss, const Matrix& outputs, const Matrix& targets) {
  check_targets(outputs, targets);
  if (loss.kind == LossKind::cross_entropy) {
    const Matrix logs = (outputs.array() + loss.stability_epsilon).log().matrix();
    return -(targets.array() * logs.array()).rowwise().sum().matrix();
  }
  return (outputs - targets).array().square().rowwise().mean().matrix();
}

Matrix loss_logit_grad(const LossFunction& loss, Head head, const Matrix& outputs, const Matrix& targets) {
  check_targets(outputs, targets);
  const double k = static_cast<double>(outputs.cols());
  if (loss.kind == LossKind::cross_entropy) {
    if (head != Head::softmax) throw UnsupportedHeadError("cross-entropy needs a softmax head");
    // dc/dz_j = -y_j s_j + p_j * sum_i y_i s_i, with s_i = p_i / (p_i + eps)
    const Matrix ys = (targets.array() * outputs.array() / (outputs.array() + loss.stability_epsilon)).matrix();
    const Vector mass = ys.rowwise().sum();
    return (outputs.array().colwise() * mass.array()).matrix() - ys;
  }
  const Matrix d_out = (2.0 / k) * (outputs - targets);
  if (head == Head::identity) return d_out;
  // softmax Jacobian-vector product: dz_j = p_j (d_j - sum_i p_i d_i)
  const Vector inner = (outputs.array() * d_out.array()).rowwise().sum();
  return (outputs.array() * (d_out.array().colwise() - inner.array())).matrix();
}

}  // namespace tg::nn
