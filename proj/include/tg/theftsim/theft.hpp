#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tg/dataio/dataset.hpp"
#include "tg/ndnet/train.hpp"
#include "tg/theftsim/oracle.hpp"
#include "tg/zoo/architecture.hpp"

namespace tg::theft {

struct AugmentationConfig {
  int rounds = 6;
  double lambda = 0.1;
  std::size_t seed_count = 150;
  std::size_t epochs_per_round = 10;
  bool binarize_labels = false;
  double learning_rate = 0.01;
  double learning_rate_decay = 1.0;  ///< multiplier applied per augmentation round
  double momentum = 0.9;
  std::size_t batch_size = 16;
  std::optional<std::pair<double, double>> clip_range = std::pair{0.0, 1.0};

  /// rounds >= 0, lambda > 0, seed_count >= classes; throws ConfigError.
  void validate(std::size_t classes) const;
};

/// x' = clip(x + lambda * sign(d p_c(x) / dx)) for each row, where p_c is the
/// substitute's softmax output at its own argmax class c.
nn::Matrix jacobian_augment(const nn::Model& substitute, const nn::Matrix& xs, double lambda,
                            const std::optional<std::pair<double, double>>& clip_range = std::pair{0.0, 1.0});

struct RoundStats {
  std::size_t dataset_size = 0;
  double mean_grad_norm = 0.0;  ///< mean L2 norm of the minibatch training gradients
  double mean_loss = 0.0;
  std::optional<double> accuracy;  ///< on the evaluation set, when one is given
};

struct TheftResult {
  nn::Model substitute;
  std::vector<RoundStats> rounds;  ///< entry r covers training on seed_count * 2^r samples
  std::vector<std::size_t> seed_indices;  ///< rows of the pool used as seeds
  std::uint64_t queries = 0;  ///< oracle queries issued by this run
};

/// Substitute training with jacobian-based dataset augmentation:
///   draw seed_count label-stratified seeds from `pool`, label them with the oracle;
///   for r = 0..rounds: train epochs_per_round on (inputs, oracle labels);
///     if r < rounds: augment every current input, label the new points, append.
/// Deterministic in `seed`.
TheftResult run_theft(const Oracle& oracle, const zoo::ArchitectureSpec& spec, const data::Dataset& pool,
                      const AugmentationConfig& cfg, std::uint64_t seed, const data::Dataset* evaluation = nullptr);

/// Pool rows run_theft uses as seeds for `seed`: seed_count label-stratified picks.
std::vector<std::size_t> seed_indices(const data::Dataset& pool, std::size_t seed_count, std::uint64_t seed);

/// Independent stream seeds derived from one base seed (splitmix64).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace tg::theft
