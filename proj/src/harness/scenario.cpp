#include "tg/harness/scenario.hpp"

#include <charconv>
#include <fstream>

#include "tg/errors.hpp"
#include "tg/zoo/architecture.hpp"

namespace tg::harness {
namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end) throw ConfigError("setting '" + key + "': cannot parse '" + text + "'");
  return value;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "on" || text == "1" || text == "yes") return true;
  if (text == "false" || text == "off" || text == "0" || text == "no") return false;
  throw ConfigError("setting '" + key + "': expected on/off, got '" + text + "'");
}

std::vector<char> parse_ids(const std::string& text) {
  std::vector<char> ids;
  for (char c : text) {
    if (c == ',' || c == ' ') continue;
    ids.push_back(c);
  }
  return ids;
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void TheftScenario::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1, got " + std::to_string(repetitions));
  if (attacker_ids.empty()) throw ConfigError("scenario lists no attackers");
  for (char id : attacker_ids) {
    if (!zoo::catalog().count(id)) throw ConfigError(std::string("attacker id '") + id + "' is not in the catalog");
  }
  zoo::find_spec(defender.arch);
  if (!(dataset.subset_fraction > 0.0 && dataset.subset_fraction <= 1.0)) {
    throw ConfigError("subset_fraction must lie in (0, 1]");
  }
  if (defender.epochs == 0 || defender.batch_size == 0 || !(defender.learning_rate > 0.0)) {
    throw ConfigError("defender training needs positive epochs, batch size and learning rate");
  }
  if (!(attack_epsilon >= 0.0)) throw ConfigError("attack_epsilon must be >= 0");
  if (defense) defense->validate();
  augmentation.validate(dataset.kind == DatasetKind::synthetic ? dataset.synthetic_classes : 10);
}

TheftScenario preset(const std::string& name) {
  TheftScenario s;
  s.name = name;
  if (name == "desk") {
    s.attacker_ids = {'A', 'I', 'X'};
    s.repetitions = 3;
    s.augmentation.rounds = 4;
    s.dataset.subset_fraction = 0.1;
    s.defender.epochs = 8;
    s.defender.learning_rate = 0.02;
  } else if (name == "full") {
    s.attacker_ids.clear();
    for (const auto& [id, spec] : zoo::catalog()) s.attacker_ids.push_back(id);
    s.repetitions = 10;
    s.augmentation.rounds = 6;
    s.dataset.subset_fraction = 1.0;
    s.defender.epochs = 5;
    s.defender.learning_rate = 0.05;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
  }
  return s;
}

void apply_settings(TheftScenario& s, const std::map<std::string, std::string>& settings) {
  auto defense_cfg = s.defense.value_or(defense::OutputPerturbationConfig{});
  bool defended = s.defense.has_value();

  for (const auto& [key, value] : settings) {
    auto size = [&] { return parse_number<std::size_t>(key, value); };
    auto real = [&] { return parse_number<double>(key, value); };
    if (key == "name") s.name = value;
    else if (key == "dataset") {
      if (value == "mnist") s.dataset.kind = DatasetKind::mnist;
      else if (value == "synthetic") s.dataset.kind = DatasetKind::synthetic;
      else throw ConfigError("setting 'dataset': expected mnist or synthetic, got '" + value + "'");
    } else if (key == "dataset_dir") s.dataset.dir = value;
    else if (key == "subset_fraction") s.dataset.subset_fraction = real();
    else if (key == "synthetic_classes") s.dataset.synthetic_classes = size();
    else if (key == "synthetic_dim") s.dataset.synthetic_dim = size();
    else if (key == "synthetic_train_per_class") s.dataset.synthetic_train_per_class = size();
    else if (key == "synthetic_test_per_class") s.dataset.synthetic_test_per_class = size();
    else if (key == "synthetic_separation") s.dataset.synthetic_separation = real();
    else if (key == "defender_arch") {
      if (value.size() != 1) throw ConfigError("setting 'defender_arch': expected one id character");
      s.defender.arch = value[0];
    } else if (key == "defender_epochs") s.defender.epochs = size();
    else if (key == "defender_learning_rate") s.defender.learning_rate = real();
    else if (key == "defender_momentum") s.defender.momentum = real();
    else if (key == "defender_batch_size") s.defender.batch_size = size();
    else if (key == "attackers") s.attacker_ids = parse_ids(value);
    else if (key == "defense") defended = parse_bool(key, value);
    else if (key == "epsilon") defense_cfg.epsilon = real();
    else if (key == "renorm") defense_cfg.renormalization = defense::parse_renormalization(value);
    else if (key == "centering_rounds") defense_cfg.centering_rounds = parse_number<int>(key, value);
    else if (key == "rounds") s.augmentation.rounds = parse_number<int>(key, value);
    else if (key == "lambda") s.augmentation.lambda = real();
    else if (key == "seed_count") s.augmentation.seed_count = size();
    else if (key == "epochs_per_round") s.augmentation.epochs_per_round = size();
    else if (key == "binarize_attacker") s.augmentation.binarize_labels = parse_bool(key, value);
    else if (key == "attacker_learning_rate") s.augmentation.learning_rate = real();
    else if (key == "attacker_learning_rate_decay") s.augmentation.learning_rate_decay = real();
    else if (key == "attacker_momentum") s.augmentation.momentum = real();
    else if (key == "attacker_batch_size") s.augmentation.batch_size = size();
    else if (key == "attack_epsilon") s.attack_epsilon = real();
    else if (key == "clip_inputs") s.clip_inputs = parse_bool(key, value);
    else if (key == "repetitions") s.repetitions = parse_number<int>(key, value);
    else if (key == "base_seed") s.base_seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError("unknown setting '" + key + "'");
  }

  s.defense = defended ? std::optional(defense_cfg) : std::nullopt;
  s.augmentation.clip_range =
      s.clip_inputs ? std::optional(std::pair{0.0, 1.0}) : std::optional<std::pair<double, double>>{};
}

std::map<std::string, std::string> read_settings_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": empty key");
    if (out.count(key)) throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
    out[key] = trim(std::string_view(body).substr(eq + 1));
  }
  return out;
}

std::map<std::string, std::string> to_settings(const TheftScenario& s) {
  std::map<std::string, std::string> m;
  m["name"] = s.name;
  m["dataset"] = s.dataset.kind == DatasetKind::mnist ? "mnist" : "synthetic";
  m["dataset_dir"] = s.dataset.dir.string();
  m["subset_fraction"] = format_double(s.dataset.subset_fraction);
  m["synthetic_classes"] = std::to_string(s.dataset.synthetic_classes);
  m["synthetic_dim"] = std::to_string(s.dataset.synthetic_dim);
  m["synthetic_train_per_class"] = std::to_string(s.dataset.synthetic_train_per_class);
  m["synthetic_test_per_class"] = std::to_string(s.dataset.synthetic_test_per_class);
  m["synthetic_separation"] = format_double(s.dataset.synthetic_separation);
  m["defender_arch"] = std::string(1, s.defender.arch);
  m["defender_epochs"] = std::to_string(s.defender.epochs);
  m["defender_learning_rate"] = format_double(s.defender.learning_rate);
  m["defender_momentum"] = format_double(s.defender.momentum);
  m["defender_batch_size"] = std::to_string(s.defender.batch_size);
  m["attackers"] = std::string(s.attacker_ids.begin(), s.attacker_ids.end());
  m["defense"] = s.defense ? "on" : "off";
  const auto d = s.defense.value_or(defense::OutputPerturbationConfig{});
  m["epsilon"] = format_double(d.epsilon);
  m["renorm"] = defense::to_string(d.renormalization);
  m["centering_rounds"] = std::to_string(d.centering_rounds);
  m["rounds"] = std::to_string(s.augmentation.rounds);
  m["lambda"] = format_double(s.augmentation.lambda);
  m["seed_count"] = std::to_string(s.augmentation.seed_count);
  m["epochs_per_round"] = std::to_string(s.augmentation.epochs_per_round);
  m["binarize_attacker"] = s.augmentation.binarize_labels ? "on" : "off";
  m["attacker_learning_rate"] = format_double(s.augmentation.learning_rate);
  m["attacker_learning_rate_decay"] = format_double(s.augmentation.learning_rate_decay);
  m["attacker_momentum"] = format_double(s.augmentation.momentum);
  m["attacker_batch_size"] = std::to_string(s.augmentation.batch_size);
  m["attack_epsilon"] = format_double(s.attack_epsilon);
  m["clip_inputs"] = s.clip_inputs ? "on" : "off";
  m["repetitions"] = std::to_string(s.repetitions);
  m["base_seed"] = std::to_string(s.base_seed);
  return m;
}

}  // namespace tg::harness
