#include "tg/advcraft/fgsm.hpp"

#include <algorithm>
#include <cmath>

#include "tg/errors.hpp"

namespace tg::adv {

void InputPerturbationConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("FGSM epsilon must be a finite value >= 0");
  if (clip_range && clip_range->first > clip_range->second) throw ConfigError("FGSM clip range is empty");
}

nn::Matrix sign(const nn::Matrix& m) {
  return m.unaryExpr([](double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); });
}

nn::Matrix fgsm_batch(const nn::Model& model, const nn::LossFunction& loss, const nn::Matrix& xs,
                      const nn::Matrix& ys, const InputPerturbationConfig& cfg) {
  cfg.validate();
  nn::Matrix out = xs;
  if (cfg.epsilon == 0.0) return out;
  out += cfg.epsilon * sign(nn::grad_input_batch(model, loss, xs, ys));
  if (cfg.clip_range) out = out.cwiseMax(cfg.clip_range->first).cwiseMin(cfg.clip_range->second);
  return out;
}

nn::Tensor fgsm(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                const nn::LabelDistribution& y, const InputPerturbationConfig& cfg) {
  if (x.size() != model.input_size()) {
    throw ShapeError("FGSM input " + nn::shape_string(x.shape()) + " does not match model input " +
                     nn::shape_string(model.input_shape()));
  }
  if (y.size() != model.output_size()) throw ShapeError("FGSM label length does not match model output");
  const nn::Matrix out = fgsm_batch(model, loss, nn::as_row(x), nn::distributions_to_matrix({y}), cfg);
  return nn::row_tensor(out, 0, x.shape());
}

double transfer_attack_accuracy(const nn::Model& target, const nn::Model& substitute, const data::Dataset& testset,
                                const InputPerturbationConfig& cfg, std::size_t batch_size) {
  if (testset.empty()) throw EmptyInputError("transfer attack needs a non-empty test set");
  if (target.input_size() != substitute.input_size() || target.output_size() != substitute.output_size()) {
    throw ShapeError("target and substitute differ in input or output shape");
  }
  const auto loss = nn::LossFunction::cross_entropy();
  const auto n = testset.inputs.rows();
  const auto chunk = static_cast<Eigen::Index>(std::max<std::size_t>(batch_size, 1));
  std::size_t correct = 0;
  for (Eigen::Index start = 0; start < n; start += chunk) {
    const Eigen::Index count = std::min(chunk, n - start);
    const nn::Matrix xs = testset.inputs.middleRows(start, count);
    const nn::Matrix sub_out = nn::outputs(substitute, xs);
    nn::Matrix labels = nn::Matrix::Zero(count, sub_out.cols());
    for (Eigen::Index r = 0; r < count; ++r) {
      Eigen::Index k = 0;
      sub_out.row(r).maxCoeff(&k);
      labels(r, k) = 1.0;
    }
    const nn::Matrix adversarial = fgsm_batch(substitute, loss, xs, labels, cfg);
    const nn::Matrix target_out = nn::outputs(target, adversarial);
    for (Eigen::Index r = 0; r < count; ++r) {
      Eigen::Index k = 0;
      target_out.row(r).maxCoeff(&k);
      if (k == testset.labels[static_cast<std::size_t>(start + r)]) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

}  // namespace tg::adv
