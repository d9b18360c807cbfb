#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tg/ndnet/gradients.hpp"

namespace tg::defense {

enum class Renormalization { none, centering, winner_takes_all };

Renormalization parse_renormalization(const std::string& name);
std::string to_string(Renormalization r);

struct OutputPerturbationConfig {
  double epsilon = 0.003;
  Renormalization renormalization = Renormalization::centering;
  int centering_rounds = 5;

  /// epsilon >= 0 and centering_rounds in [1, 50]; throws ConfigError.
  void validate() const;
};

struct PerturbationVector {
  std::vector<double> delta;
};

/// Below this parameter-gradient norm the label-space direction is undefined.
inline constexpr double kDegenerateGradientNorm = 1e-12;

/// grad_y || grad_theta c(F_theta, x, y) ||_2 for the cross-entropy cost, holding
/// theta and x fixed.
///
/// With u_i = grad_theta log p_i (one reverse pass per class) and
/// s_i = p_i / (p_i + eps) from the cost's stability epsilon, the parameter
/// gradient is g = -sum_i y_i s_i u_i and coordinate j of the result is
/// -s_j (u_j . g) / ||g||. For eps -> 0 (s_i -> 1) this is -(u_j . g) / ||g||.
///
/// Returns nullopt when ||g|| < kDegenerateGradientNorm.
std::optional<PerturbationVector> gradient_norm_y_gradient(const nn::Model& model, const nn::LossFunction& loss,
                                                           const nn::Tensor& x, const nn::LabelDistribution& y);

struct CounterAttackResult {
  nn::LabelDistribution perturbed;   ///< y_x + eps * sign(direction), before renormalization
  nn::LabelDistribution normalized;  ///< after the configured renormalization
  bool degenerate = false;           ///< gradient norm below threshold; outputs equal y_x
  double grad_norm = 0.0;            ///< ||grad_theta c(F, x, y_x)||
};

/// Full counter-attack with intermediate values.
CounterAttackResult counter_attack_detailed(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                                            const nn::LabelDistribution& y_x, const OutputPerturbationConfig& cfg);

/// y* = renormalize(y_x + eps * sign(grad_y ||grad_theta c(F_theta, x, y_x)||_2)).
nn::LabelDistribution counter_attack(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                                     const nn::LabelDistribution& y_x, const OutputPerturbationConfig& cfg);

}  // namespace tg::defense
