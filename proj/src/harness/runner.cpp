#include "tg/harness/runner.hpp"

#include <exception>
#include <random>

#include "tg/advcraft/fgsm.hpp"
#include "tg/dataio/idx.hpp"
#include "tg/dataio/synthetic.hpp"
#include "tg/errors.hpp"
#include "tg/ndnet/gradients.hpp"
#include "tg/theftsim/oracle.hpp"
#include "tg/theftsim/theft.hpp"
#include "tg/zoo/architecture.hpp"
#include "tg/zoo/checkpoint.hpp"

namespace tg::harness {
namespace {

constexpr std::uint64_t kSubsetSeed = 0x5eed;

template <class F>
auto in_context(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    std::throw_with_nested(ScenarioError(what + ": " + e.what()));
  }
}

void say(const RunOptions& o, const std::string& msg) {
  if (o.log) o.log(msg);
}

std::vector<std::size_t> complement(std::size_t n, std::vector<std::size_t> taken) {
  std::vector<bool> used(n, false);
  for (auto i : taken) used[i] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < n; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  return rest;
}

}  // namespace

ScenarioData load_data(const TheftScenario& s) {
  const auto& d = s.dataset;
  if (d.kind == DatasetKind::synthetic) {
    ScenarioData out{data::synthetic(d.synthetic_classes, d.synthetic_dim, d.synthetic_train_per_class,
                                     d.synthetic_separation, theft::derive_seed(s.base_seed, 100)),
                     data::synthetic(d.synthetic_classes, d.synthetic_dim, d.synthetic_test_per_class,
                                     d.synthetic_separation, theft::derive_seed(s.base_seed, 101))};
    out.train.name = "synthetic-train";
    out.test.name = "synthetic-test";
    return out;
  }
  auto mnist = data::load_mnist(d.dir);
  if (d.subset_fraction < 1.0) {
    mnist.train = data::stratified_subset(mnist.train, d.subset_fraction, theft::derive_seed(kSubsetSeed, 0));
    mnist.test = data::stratified_subset(mnist.test, d.subset_fraction, theft::derive_seed(kSubsetSeed, 1));
  }
  return {std::move(mnist.train), std::move(mnist.test)};
}

std::uint64_t repetition_seed(const TheftScenario& s, int rep) {
  return s.base_seed + static_cast<std::uint64_t>(rep);
}

nn::Model train_defender(const TheftScenario& s, const data::Dataset& train, std::uint64_t seed,
                         const std::function<void(const std::string&)>& log) {
  if (train.empty()) throw EmptyInputError("defender training set is empty");
  nn::Model model = zoo::build(zoo::find_spec(s.defender.arch), train.sample_shape, theft::derive_seed(seed, 10));
  const nn::Matrix targets = nn::one_hot_rows(train.labels, train.classes);
  const auto loss = nn::LossFunction::cross_entropy();
  const nn::SgdConfig cfg{s.defender.learning_rate, s.defender.momentum, s.defender.batch_size};
  nn::SgdState state;
  std::mt19937_64 rng(theft::derive_seed(seed, 11));
  for (std::size_t e = 0; e < s.defender.epochs; ++e) {
    const auto stats = nn::train_epochs(model, loss, train.inputs, targets, cfg, state, 1, rng);
    if (log) log("defender epoch " + std::to_string(e + 1) + "/" + std::to_string(s.defender.epochs) +
                 " loss " + std::to_string(stats.mean_loss));
  }
  return model;
}

ArgmaxAgreement argmax_agreement(const nn::Model& defender, const defense::OutputPerturbationConfig& cfg,
                                 const data::Dataset& testset) {
  if (testset.empty()) throw EmptyInputError("argmax agreement needs test samples");
  const auto loss = nn::LossFunction::cross_entropy();
  const nn::Matrix raw = nn::outputs_chunked(defender, testset.inputs);
  std::size_t after = 0, before = 0, degenerate = 0;
  for (Eigen::Index r = 0; r < raw.rows(); ++r) {
    const auto y = nn::to_distribution(raw, r);
    const auto res = defense::counter_attack_detailed(defender, loss, testset.input(static_cast<std::size_t>(r)), y, cfg);
    const auto top = nn::argmax(y);
    after += nn::argmax(res.normalized) == top;
    before += nn::argmax(res.perturbed) == top;
    degenerate += res.degenerate;
  }
  const double n = static_cast<double>(raw.rows());
  return {after / n, before / n, degenerate / n};
}

RunReport run_scenario(const TheftScenario& s, const ScenarioData& data, const RunOptions& options) {
  s.validate();
  if (!options.defenders.empty() && options.defenders.size() != static_cast<std::size_t>(s.repetitions)) {
    throw ConfigError("expected " + std::to_string(s.repetitions) + " pre-trained defenders, got " +
                      std::to_string(options.defenders.size()));
  }
  const adv::InputPerturbationConfig attack{
      s.attack_epsilon, s.clip_inputs ? std::optional(std::pair{0.0, 1.0}) : std::nullopt};
  const std::string where = "scenario '" + s.name + "'";

  RunReport report;
  for (int rep = 0; rep < s.repetitions; ++rep) {
    const std::uint64_t seed = repetition_seed(s, rep);
    const std::string rep_where = where + ", repetition " + std::to_string(rep);

    std::shared_ptr<const nn::Model> defender;
    if (!options.defenders.empty()) {
      defender = options.defenders[static_cast<std::size_t>(rep)];
    } else {
      say(options, rep_where + ": training defender");
      defender = in_context(rep_where + ", defender training", [&] {
        return std::make_shared<const nn::Model>(train_defender(s, data.train, seed, options.log));
      });
    }
    if (!options.checkpoint_dir.empty()) {
      in_context(rep_where + ", checkpoint", [&] {
        std::filesystem::create_directories(options.checkpoint_dir);
        zoo::save_checkpoint(*defender, options.checkpoint_dir / ("defender_rep" + std::to_string(rep) + ".tgm"));
        return 0;
      });
    }
    const double clean = nn::accuracy(*defender, data.test.inputs, data.test.labels);
    say(options, rep_where + ": defender test accuracy " + std::to_string(clean));

    ArgmaxAgreement agreement;
    if (s.defense) {
      agreement = in_context(rep_where + ", argmax agreement",
                             [&] { return argmax_agreement(*defender, *s.defense, data.test); });
      say(options, rep_where + ": argmax unchanged " + std::to_string(agreement.after_renormalization));
    }

    for (char id : s.attacker_ids) {
      const std::string att_where = rep_where + ", attacker " + std::string(1, id);
      say(options, att_where + ": stealing");
      in_context(att_where, [&] {
        const theft::Oracle oracle(defender, s.defense);
        const std::uint64_t theft_seed = theft::derive_seed(seed, 1000 + static_cast<std::uint64_t>(id));
        const auto evaluation = data.test.subset(
            complement(data.test.size(), theft::seed_indices(data.test, s.augmentation.seed_count, theft_seed)));
        const auto result =
            theft::run_theft(oracle, zoo::find_spec(id), data.test, s.augmentation, theft_seed, &evaluation);

        AttackerRun run;
        run.attacker = id;
        run.repetition = rep;
        run.defender_clean_accuracy = clean;
        run.argmax = agreement;
        for (const auto& r : result.rounds) {
          run.round_accuracy.push_back(r.accuracy.value_or(0.0));
          run.round_grad_norm.push_back(r.mean_grad_norm);
        }
        run.seed_baseline_accuracy = run.round_accuracy.front();
        run.substitute_accuracy = run.round_accuracy.back();
        run.blackbox_accuracy_under_transfer =
            adv::transfer_attack_accuracy(*defender, result.substitute, evaluation, attack);
        run.oracle_queries = result.queries;
        say(options, att_where + ": substitute " + std::to_string(run.substitute_accuracy) + " (seeds only " +
                         std::to_string(run.seed_baseline_accuracy) + "), defender under transfer " +
                         std::to_string(run.blackbox_accuracy_under_transfer));
        report.runs.push_back(std::move(run));
        return 0;
      });
    }
  }
  return report;
}

RunReport run_scenario(const TheftScenario& s, const RunOptions& options) {
  s.validate();
  const auto data = in_context("scenario '" + s.name + "', loading data", [&] { return load_data(s); });
  return run_scenario(s, data, options);
}

}  // namespace tg::harness
