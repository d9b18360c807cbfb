#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tg/advcraft/fgsm.hpp"
#include "tg/counterdef/counter_attack.hpp"
#include "tg/theftsim/theft.hpp"

namespace tg::harness {

enum class DatasetKind { mnist, synthetic };

struct DatasetConfig {
  DatasetKind kind = DatasetKind::mnist;
  std::filesystem::path dir = "data/mnist";
  double subset_fraction = 1.0;  ///< stratified fraction kept of both train and test splits
  // synthetic blobs
  std::size_t synthetic_classes = 10;
  std::size_t synthetic_dim = 16;
  std::size_t synthetic_train_per_class = 200;
  std::size_t synthetic_test_per_class = 100;
  double synthetic_separation = 6.0;
};

struct DefenderTraining {
  char arch = 'D';
  std::size_t epochs = 10;
  double learning_rate = 0.01;
  double momentum = 0.9;
  std::size_t batch_size = 64;
};

/// Complete configuration of one attacker-versus-defender experiment.
struct TheftScenario {
  std::string name = "custom";
  DatasetConfig dataset;
  DefenderTraining defender;
  std::vector<char> attacker_ids = {'A', 'I', 'X'};
  std::optional<defense::OutputPerturbationConfig> defense;
  theft::AugmentationConfig augmentation;
  double attack_epsilon = 0.3;
  bool clip_inputs = true;  ///< clip FGSM and augmentation outputs to [0, 1]
  int repetitions = 1;
  std::uint64_t base_seed = 0;

  /// repetitions >= 1, attacker ids in the catalog, nested configs valid.
  void validate() const;
};

/// Named presets: "desk" (A, I, X; 3 repetitions; 4 rounds; 10% of MNIST) and
/// "full" (all ten catalog ids; 10 repetitions; 6 rounds; all of MNIST).
TheftScenario preset(const std::string& name);

/// Applies flat "key = value" settings (see README for the key list). Unknown
/// keys and malformed values raise ConfigError naming the key.
void apply_settings(TheftScenario& s, const std::map<std::string, std::string>& settings);

/// Reads a scenario file: one "key = value" per line, '#' starts a comment.
std::map<std::string, std::string> read_settings_file(const std::filesystem::path& path);

/// Canonical key/value dump of a scenario (round-trips through apply_settings).
std::map<std::string, std::string> to_settings(const TheftScenario& s);

}  // namespace tg::harness
