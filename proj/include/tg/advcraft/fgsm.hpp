#pragma once

#include <optional>
#include <utility>

#include "tg/dataio/dataset.hpp"
#include "tg/ndnet/gradients.hpp"

namespace tg::adv {

struct InputPerturbationConfig {
  double epsilon = 0.3;  ///< infinity-norm budget in input units
  std::optional<std::pair<double, double>> clip_range = std::pair{0.0, 1.0};

  void validate() const;
};

/// x* = clip(x + epsilon * sign(grad_x c(F, x, y))), with sign(0) = 0.
nn::Tensor fgsm(const nn::Model& model, const nn::LossFunction& loss, const nn::Tensor& x,
                const nn::LabelDistribution& y, const InputPerturbationConfig& cfg);

/// Row-wise fgsm over a batch.
nn::Matrix fgsm_batch(const nn::Model& model, const nn::LossFunction& loss, const nn::Matrix& xs,
                      const nn::Matrix& ys, const InputPerturbationConfig& cfg);

/// Elementwise sign with sign(0) = 0.
nn::Matrix sign(const nn::Matrix& m);

/// Crafts cross-entropy FGSM samples on `substitute` (labelled with its own
/// one-hot argmax) and returns `target`'s accuracy on them against the true labels.
double transfer_attack_accuracy(const nn::Model& target, const nn::Model& substitute, const data::Dataset& testset,
                                const InputPerturbationConfig& cfg, std::size_t batch_size = 128);

}  // namespace tg::adv
