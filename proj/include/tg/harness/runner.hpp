#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "tg/dataio/dataset.hpp"
#include "tg/harness/scenario.hpp"
#include "tg/ndnet/model.hpp"

namespace tg::harness {

/// Train and test splits a scenario runs on.
struct ScenarioData {
  data::Dataset train;
  data::Dataset test;
};

/// MNIST from the configured directory (reduced to subset_fraction, stratified),
/// or freshly generated synthetic blobs.
ScenarioData load_data(const TheftScenario& s);

/// Seed of repetition `rep`: base_seed + rep.
std::uint64_t repetition_seed(const TheftScenario& s, int rep);

/// Trains the scenario's defender on `train` from `seed`.
nn::Model train_defender(const TheftScenario& s, const data::Dataset& train, std::uint64_t seed,
                         const std::function<void(const std::string&)>& log = {});

/// Fraction of rows whose defended argmax equals the raw argmax.
struct ArgmaxAgreement {
  double after_renormalization = 1.0;
  double before_renormalization = 1.0;
  double degenerate_fraction = 0.0;  ///< queries whose gradient norm was below the threshold
};

ArgmaxAgreement argmax_agreement(const nn::Model& defender, const defense::OutputPerturbationConfig& cfg,
                                 const data::Dataset& testset);

/// Metrics of one attacker against one trained defender.
struct AttackerRun {
  char attacker = '?';
  int repetition = 0;
  double defender_clean_accuracy = 0.0;
  ArgmaxAgreement argmax;
  double seed_baseline_accuracy = 0.0;  ///< substitute after training on the seeds only
  double substitute_accuracy = 0.0;     ///< after the last augmentation round
  double blackbox_accuracy_under_transfer = 0.0;
  std::uint64_t oracle_queries = 0;
  std::vector<double> round_accuracy;
  std::vector<double> round_grad_norm;  ///< mean substitute training-gradient norm per round
};

struct RunReport {
  std::vector<AttackerRun> runs;  ///< ordered by repetition, then scenario attacker order
};

struct RunOptions {
  std::function<void(const std::string&)> log;
  /// Pre-trained defenders, one per repetition; trained on demand when empty.
  std::vector<std::shared_ptr<const nn::Model>> defenders;
  /// When set, each trained defender is written here as defender_rep<r>.tgm.
  std::filesystem::path checkpoint_dir;
};

/// Trains one defender per repetition, runs every attacker against it and
/// collects the metrics. Deterministic in the scenario. Errors are rethrown as
/// ScenarioError naming the step, with the original error nested.
RunReport run_scenario(const TheftScenario& s, const ScenarioData& data, const RunOptions& options = {});
RunReport run_scenario(const TheftScenario& s, const RunOptions& options = {});

}  // namespace tg::harness
