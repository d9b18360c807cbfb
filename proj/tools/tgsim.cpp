// tgsim: train defenders, run theft scenarios and summarize reports.
//
//   tgsim train-defender --preset desk --dataset-dir data/mnist --out out/
//   tgsim run --preset desk --seed 7 --out out/desk
//   tgsim run --scenario my.scenario --defense on --renorm wta --out out/wta
//   tgsim summarize --out out/desk

#include <CLI11.hpp>

#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "tg/errors.hpp"
#include "tg/dataio/idx.hpp"
#include "tg/harness/report.hpp"
#include "tg/harness/runner.hpp"
#include "tg/harness/scenario.hpp"
#include "tg/ndnet/gradients.hpp"
#include "tg/zoo/checkpoint.hpp"

namespace {

struct ScenarioFlags {
  std::string preset;
  std::string scenario_file;
  std::string dataset_dir;
  std::string defense;
  std::optional<double> epsilon;
  std::string renorm;
  bool binarize = false;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

void add_scenario_flags(CLI::App& cmd, ScenarioFlags& f) {
  cmd.add_option("--preset", f.preset, "Start from a named preset")->check(CLI::IsMember({"desk", "full"}));
  cmd.add_option("--scenario", f.scenario_file, "Scenario file with key = value lines")->check(CLI::ExistingFile);
  cmd.add_option("--dataset-dir", f.dataset_dir, "Directory holding the MNIST IDX files");
  cmd.add_option("--defense", f.defense, "Counter-attack on the oracle outputs")->check(CLI::IsMember({"on", "off"}));
  cmd.add_option("--epsilon", f.epsilon, "Counter-attack step size");
  cmd.add_option("--renorm", f.renorm, "Renormalization after the counter-attack")
      ->check(CLI::IsMember({"none", "centering", "wta"}));
  cmd.add_flag("--binarize-attacker", f.binarize, "Attacker trains on one-hot argmax labels");
  cmd.add_option("--seed", f.seed, "Base seed; repetition r uses seed + r");
  cmd.add_flag("-q,--quiet", f.quiet, "No progress messages");
}

tg::harness::TheftScenario resolve(const ScenarioFlags& f) {
  auto s = f.preset.empty() ? tg::harness::TheftScenario{} : tg::harness::preset(f.preset);
  std::map<std::string, std::string> settings;
  if (!f.scenario_file.empty()) settings = tg::harness::read_settings_file(f.scenario_file);
  if (!f.dataset_dir.empty()) settings["dataset_dir"] = f.dataset_dir;
  if (!f.defense.empty()) settings["defense"] = f.defense;
  if (f.epsilon) {
    std::ostringstream v;
    v.precision(17);
    v << *f.epsilon;
    settings["epsilon"] = v.str();
  }
  if (!f.renorm.empty()) settings["renorm"] = f.renorm;
  if (f.binarize) settings["binarize_attacker"] = "on";
  if (f.seed) settings["base_seed"] = std::to_string(*f.seed);
  tg::harness::apply_settings(s, settings);
  s.validate();
  return s;
}

std::function<void(const std::string&)> logger(bool quiet) {
  if (quiet) return {};
  return [](const std::string& msg) { std::cerr << "[tgsim] " << msg << std::endl; };
}

std::string describe(const std::exception& e) {
  std::string msg = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    const std::string tail = describe(inner);
    if (msg.find(tail) == std::string::npos) msg += ": " + tail;
  } catch (...) {
  }
  return msg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model theft and counter-attack simulation"};
  app.require_subcommand(1);

  ScenarioFlags train_flags;
  std::string train_out = "out";
  auto* train_cmd = app.add_subcommand("train-defender", "Train the defender of a scenario and save a checkpoint");
  add_scenario_flags(*train_cmd, train_flags);
  train_cmd->add_option("--out", train_out, "Output directory");

  ScenarioFlags run_flags;
  std::string run_out = "out";
  auto* run_cmd = app.add_subcommand("run", "Run a scenario and write report.csv and summary.txt");
  add_scenario_flags(*run_cmd, run_flags);
  run_cmd->add_option("--out", run_out, "Output directory");

  std::string summary_out = "out";
  auto* sum_cmd = app.add_subcommand("summarize", "Print the summary table of an existing report.csv");
  sum_cmd->add_option("--out", summary_out, "Directory holding report.csv, or the file itself");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "tgsim: error: " << e.what() << "\n";
    return e.get_exit_code() != 0 ? e.get_exit_code() : 2;
  }

  try {
    if (*train_cmd) {
      const auto s = resolve(train_flags);
      const auto log = logger(train_flags.quiet);
      const auto data = tg::harness::load_data(s);
      const auto model = tg::harness::train_defender(s, data.train, tg::harness::repetition_seed(s, 0), log);
      std::filesystem::create_directories(train_out);
      const auto path = std::filesystem::path(train_out) / "defender.tgm";
      tg::zoo::save_checkpoint(model, path);
      std::cout << "defender test accuracy " << tg::nn::accuracy(model, data.test.inputs, data.test.labels)
                << ", saved " << path.string() << "\n";
    } else if (*run_cmd) {
      const auto s = resolve(run_flags);
      tg::harness::RunOptions options;
      options.log = logger(run_flags.quiet);
      options.checkpoint_dir = std::filesystem::path(run_out) / "checkpoints";
      const auto report = tg::harness::run_scenario(s, options);
      tg::harness::emit(report, run_out);
      std::cout << tg::harness::summary_table(tg::harness::summarize(report));
    } else if (*sum_cmd) {
      std::filesystem::path path = summary_out;
      if (std::filesystem::is_directory(path)) path /= "report.csv";
      const auto bytes = tg::data::read_file(path);
      const auto rows = tg::harness::parse_csv(std::string(bytes.begin(), bytes.end()));
      std::cout << tg::harness::summary_table(tg::harness::summarize(rows));
    }
  } catch (const std::exception& e) {
    std::cerr << "tgsim: error: " << describe(e) << "\n";
    return 1;
  }
  return 0;
}
