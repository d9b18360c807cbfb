#include "tg/counterdef/counter_attack.hpp"

#include <cmath>

#include "tg/counterdef/renormalize.hpp"
#include "tg/errors.hpp"

namespace tg::defense {
namespace {

struct NormGradient {
  std::optional<PerturbationVector> direction;
  double grad_norm = 0.0;
};

NormGradient norm_gradient(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                           const nn::LabelDistribution& y) {
  if (loss.kind != nn::LossKind::cross_entropy) {
    throw ConfigError("label-space gradient of the parameter-gradient norm is defined for cross-entropy only");
  }
  if (y.size() != model.output_size()) throw ShapeError("label distribution length does not match model output");
  const auto scores = nn::class_score_gradients(model, x);
  const std::size_t k = y.size();

  std::vector<double> s(k);
  for (std::size_t i = 0; i < k; ++i) {
    s[i] = scores.probabilities[i] / (scores.probabilities[i] + loss.stability_epsilon);
  }
  nn::ParameterVector g = model.params().zeros_like();
  for (std::size_t i = 0; i < k; ++i) g.axpy(-y[i] * s[i], scores.grads[i]);

  NormGradient out;
  out.grad_norm = g.norm();
  if (!(out.grad_norm >= kDegenerateGradientNorm)) return out;
  PerturbationVector d;
  d.delta.resize(k);
  for (std::size_t j = 0; j < k; ++j) d.delta[j] = -s[j] * scores.grads[j].dot(g) / out.grad_norm;
  out.direction = std::move(d);
  return out;
}

}  // namespace

Renormalization parse_renormalization(const std::string& name) {
  if (name == "none") return Renormalization::none;
  if (name == "centering") return Renormalization::centering;
  if (name == "wta" || name == "winner-takes-all") return Renormalization::winner_takes_all;
  throw ConfigError("unknown renormalization '" + name + "' (expected none, centering or wta)");
}

std::string to_string(Renormalization r) {
  switch (r) {
    case Renormalization::none: return "none";
    case Renormalization::centering: return "centering";
    case Renormalization::winner_takes_all: return "wta";
  }
  return "?";
}

void OutputPerturbationConfig::validate() const {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) throw ConfigError("defense epsilon must be a finite value >= 0");
  if (centering_rounds < 1 || centering_rounds > 50) throw ConfigError("centering rounds must be in [1, 50]");
}

std::optional<PerturbationVector> gradient_norm_y_gradient(const nn::Model& model, const nn::LossFunction& loss,
                                                           const nn::Tensor& x, const nn::LabelDistribution& y) {
  return norm_gradient(model, loss, x, y).direction;
}

CounterAttackResult counter_attack_detailed(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                                            const nn::LabelDistribution& y_x, const OutputPerturbationConfig& cfg) {
  cfg.validate();
  CounterAttackResult result{y_x, y_x, false, 0.0};
  if (cfg.epsilon == 0.0) return result;

  const auto ng = norm_gradient(model, loss, x, y_x);
  result.grad_norm = ng.grad_norm;
  if (!ng.direction) {
    result.degenerate = true;
    return result;
  }
  for (std::size_t j = 0; j < y_x.size(); ++j) {
    const double d = ng.direction->delta[j];
    result.perturbed[j] = y_x[j] + cfg.epsilon * static_cast<double>((d > 0.0) - (d < 0.0));
  }
  switch (cfg.renormalization) {
    case Renormalization::none: result.normalized = result.perturbed; break;
    case Renormalization::centering:
      result.normalized = renorm_centering(y_x, result.perturbed, cfg.centering_rounds);
      break;
    case Renormalization::winner_takes_all: result.normalized = renorm_winner_takes_all(result.perturbed); break;
  }
  return result;
}

nn::LabelDistribution counter_attack(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                                     const nn::LabelDistribution& y_x, const OutputPerturbationConfig& cfg) {
  return counter_attack_detailed(model, loss, x, y_x, cfg).normalized;
}

}  // namespace tg::defense
