#include "tg/theftsim/theft.hpp"

#include <algorithm>
#include <cmath>

#include "tg/advcraft/fgsm.hpp"
#include "tg/errors.hpp"

namespace tg::theft {

void AugmentationConfig::validate(std::size_t classes) const {
  if (rounds < 0) throw ConfigError("augmentation rounds must be >= 0");
  if (!(lambda > 0.0)) throw ConfigError("augmentation lambda must be > 0");
  if (seed_count < classes) {
    throw ConfigError("seed count " + std::to_string(seed_count) + " is below the number of classes " +
                      std::to_string(classes));
  }
  if (epochs_per_round == 0) throw ConfigError("epochs per round must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
  if (batch_size == 0) throw ConfigError("batch size must be positive");
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

nn::Matrix jacobian_augment(const nn::Model& substitute, const nn::Matrix& xs, double lambda,
                            const std::optional<std::pair<double, double>>& clip_range) {
  if (substitute.head() != nn::Head::softmax) throw UnsupportedHeadError("jacobian augmentation needs a softmax head");
  nn::Matrix out = xs;
  if (lambda == 0.0 || xs.rows() == 0) return out;
  constexpr Eigen::Index kChunk = 128;
  for (Eigen::Index start = 0; start < xs.rows(); start += kChunk) {
    const Eigen::Index n = std::min(kChunk, xs.rows() - start);
    const auto trace = nn::forward_trace(substitute, xs.middleRows(start, n));
    const nn::Matrix p = nn::softmax_rows(trace.logits());
    // d p_c / d z = p_c (e_c - p)
    nn::Matrix d_logits(p.rows(), p.cols());
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      Eigen::Index c = 0;
      const double pc = p.row(r).maxCoeff(&c);
      d_logits.row(r) = -pc * p.row(r);
      d_logits(r, c) += pc;
    }
    const auto back = nn::backward(substitute, trace, d_logits, true, nn::ParamGradMode::none);
    out.middleRows(start, n) += lambda * adv::sign(back.input_grad);
  }
  if (clip_range) out = out.cwiseMax(clip_range->first).cwiseMin(clip_range->second);
  return out;
}

std::vector<std::size_t> seed_indices(const data::Dataset& pool, std::size_t seed_count, std::uint64_t seed) {
  return data::stratified_pick(pool.labels, pool.classes, seed_count, derive_seed(seed, 2));
}

TheftResult run_theft(const Oracle& oracle, const zoo::ArchitectureSpec& spec, const data::Dataset& pool,
                      const AugmentationConfig& cfg, std::uint64_t seed, const data::Dataset* evaluation) {
  const std::size_t classes = oracle.model().output_size();
  cfg.validate(classes);
  if (pool.size() < cfg.seed_count) {
    throw ConfigError("data pool holds " + std::to_string(pool.size()) + " samples, " +
                      std::to_string(cfg.seed_count) + " seeds requested");
  }
  TheftResult result;
  result.substitute = zoo::build(spec, pool.sample_shape, derive_seed(seed, 1));
  result.seed_indices = seed_indices(pool, cfg.seed_count, seed);

  nn::Matrix inputs = pool.subset(result.seed_indices).inputs;
  auto label = [&](const nn::Matrix& xs) {
    nn::Matrix ys = oracle.query(xs);
    result.queries += static_cast<std::uint64_t>(xs.rows());
    if (cfg.binarize_labels) {
      for (Eigen::Index r = 0; r < ys.rows(); ++r) {
        Eigen::Index c = 0;
        ys.row(r).maxCoeff(&c);
        ys.row(r).setZero();
        ys(r, c) = 1.0;
      }
    }
    return ys;
  };
  nn::Matrix targets = label(inputs);

  const auto loss = nn::LossFunction::cross_entropy();
  std::mt19937_64 shuffle_rng(derive_seed(seed, 3));
  for (int r = 0; r <= cfg.rounds; ++r) {
    nn::SgdConfig sgd{cfg.learning_rate * std::pow(cfg.learning_rate_decay, r), cfg.momentum, cfg.batch_size};
    nn::SgdState state;
    const auto stats =
        nn::train_epochs(result.substitute, loss, inputs, targets, sgd, state, cfg.epochs_per_round, shuffle_rng);
    RoundStats rs;
    rs.dataset_size = static_cast<std::size_t>(inputs.rows());
    rs.mean_grad_norm = stats.mean_grad_norm;
    rs.mean_loss = stats.mean_loss;
    if (evaluation) rs.accuracy = nn::accuracy(result.substitute, evaluation->inputs, evaluation->labels);
    result.rounds.push_back(rs);

    if (r == cfg.rounds) break;
    const nn::Matrix fresh = jacobian_augment(result.substitute, inputs, cfg.lambda, cfg.clip_range);
    const nn::Matrix fresh_targets = label(fresh);
    nn::Matrix grown_inputs(inputs.rows() * 2, inputs.cols());
    grown_inputs << inputs, fresh;
    nn::Matrix grown_targets(targets.rows() * 2, targets.cols());
    grown_targets << targets, fresh_targets;
    inputs = std::move(grown_inputs);
    targets = std::move(grown_targets);
  }
  return result;
}

}  // namespace tg::theft
