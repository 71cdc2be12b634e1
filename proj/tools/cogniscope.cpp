// cogniscope command-line front end.
//
//   cogniscope <verb> [--config FILE] [--seed N] [--out DIR]
//
// Seed precedence: --seed, then $COGNISCOPE_SEED, then the config file.
// Exit status: 0 success, 2 usage or config error, 1 runtime failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cogniscope/config.hpp"
#include "cogniscope/harness.hpp"
#include "cogniscope/learn_mod.hpp"
#include "cogniscope/learn_power.hpp"
#include "cogniscope/predict_occ.hpp"

namespace fs = std::filesystem;
using namespace cogniscope;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "JSON experiment configuration");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "global 64-bit seed");
  cmd->add_option("--out", o.out, "output directory");
}

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(text, &used, 0);
    if (used != text.size() || text.front() == '-') throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin, "expected an unsigned 64-bit integer, got '" + text + "'");
  }
}

ExperimentConfig load(const CommonOptions& o, const std::string& experiment = {}) {
  ExperimentConfig cfg = o.config.empty() ? parse_config(nlohmann::json::object()) : validate_config(o.config);
  if (!experiment.empty()) cfg.experiment = experiment;
  if (const char* env = std::getenv("COGNISCOPE_SEED"); env && *env) cfg.seed = parse_seed(env, "COGNISCOPE_SEED");
  if (o.seed) cfg.seed = *o.seed;
  if (o.out) cfg.output_dir = *o.out;
  return cfg;
}

void write_text(const fs::path& p, const std::string& content) {
  fs::create_directories(p.parent_path().empty() ? fs::path(".") : p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << content;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("--model", "cannot read " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void run_and_write(const ExperimentConfig& cfg) {
  const auto bundle = run_experiment(cfg);
  write_bundle(bundle, cfg);
  for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << cfg.experiment << " -> " << cfg.output_dir << " (config " << bundle.config_hash << ", seed "
            << cfg.seed << ")\n";
}

// ---- learn-power ------------------------------------------------------------

void learn_power(const ExperimentConfig& cfg, bool train) {
  const auto r = run_fig4_trial(cfg.fig4, cfg.seed, 0);
  const fs::path dir(cfg.output_dir);
  std::ostringstream clusters, states;
  clusters << "frame_id,cluster,state\n";
  for (std::size_t i = 0; i < r.train.size(); ++i)
    clusters << i << ',' << r.clustering.assignments[i] << ','
             << r.states.cluster_to_state[r.clustering.assignments[i]] << '\n';
  states << "state,power\n";
  for (std::size_t s = 0; s < r.states.state_powers.size(); ++s)
    states << s << ',' << format_number(r.states.state_powers[s]) << '\n';
  write_text(dir / "learn_power_clusters.csv", clusters.str());
  write_text(dir / "learn_power_states.csv", states.str());
  std::cout << "k = " << r.clustering.k << '\n';
  if (!train) return;
  if (!r.classifier) throw std::runtime_error("only one power state found; nothing to train");
  std::ostringstream model;
  save_classifier(*r.classifier, model);
  write_text(dir / "learn_power_model.txt", model.str());
  std::cout << "test accuracy " << format_number(r.test_accuracy) << " (Bayes " << format_number(r.bayes_accuracy)
            << ")\n";
}

// ---- learn-mod --------------------------------------------------------------

std::vector<CumulantVector> draw_vectors(const Fig5Config& c, std::uint64_t seed, const char* module) {
  Rng rng = make_stream(seed, "fig5-modulation-dpgmm", module, 0);
  std::vector<cplx> buf(c.samples_per_vector);
  std::vector<CumulantVector> out;
  for (const auto& p : fig5_patterns(c)) {
    const auto pattern = p.power == 0.0 ? TransmitPattern::idle() : TransmitPattern::make(p.modulation, p.power);
    for (std::size_t k = 0; k < c.holdout_per_pattern; ++k) {
      synthesize_samples(pattern, c.noise_variance, buf, rng);
      auto v = estimate_cumulants(buf);
      v.truth_label = pattern;
      out.push_back(v);
    }
  }
  return out;
}

void save_model(const MixtureModel& m, const fs::path& p) {
  std::ostringstream s;
  save_mixture(m, s);
  write_text(p, s.str());
}

MixtureModel load_model(const std::string& path) {
  std::istringstream in(read_text(path));
  return load_mixture(in);
}

void learn_mod(const ExperimentConfig& cfg, const std::string& action, const std::string& model_path) {
  const fs::path dir(cfg.output_dir);
  const auto& c = cfg.fig5;
  if (action == "fit") {
    const auto r = run_fig5_trial(c, cfg.seed, 0);
    save_model(r.model, dir / "learn_mod_model.json");
    write_text(dir / "learn_mod_components.csv", fig5_components_csv(r));
    std::cout << r.dominant_components << " dominant components\n";
    return;
  }
  if (model_path.empty()) throw ConfigError("--model", "required for learn-mod " + action);
  const auto model = load_model(model_path);
  if (action == "update") {
    const auto batch = draw_vectors(c, cfg.seed, "learn_mod_update");
    const auto updated = update_posterior(model, batch, fig5_dpgmm_config(c, cfg.seed));
    save_model(updated, dir / "learn_mod_model.json");
    std::cout << updated.dominant(c.dominance).size() << " dominant components after update\n";
    return;
  }
  const auto noise = identify_noise_component(model, c.noise_gate, c.dominance);
  const auto match = match_patterns(model, ModulationDictionary::standard(),
                                    noise.idle_observed() ? noise.noise_variance : 0.0, noise.component_id,
                                    c.dominance);
  std::ostringstream csv;
  csv << "frame_id,truth_mod,component,matched_mod,unknown\n";
  const auto vectors = draw_vectors(c, cfg.seed, "learn_mod_classify");
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto a = classify_vector(model, match.assignments, vectors[i], noise.component_id);
    csv << i << ',' << to_string(vectors[i].truth_label->modulation) << ','
        << (a.component_id ? std::to_string(*a.component_id) : std::string()) << ','
        << (a.unknown ? std::string() : std::string(to_string(a.modulation))) << ',' << (a.unknown ? 1 : 0) << '\n';
  }
  write_text(dir / "learn_mod_classified.csv", csv.str());
}

// ---- predict ----------------------------------------------------------------

void predict_run(ExperimentConfig cfg) {
  cfg.experiment = "fig6-occupancy-prediction";
  run_and_write(cfg);
  // History database of the first trial at the middle grid point.
  const auto& c = cfg.fig6;
  if (c.vacancy_grid.empty() || c.trials == 0) return;
  const std::size_t g = c.vacancy_grid.size() / 2;
  Rng rng = make_stream(cfg.seed, "fig6-occupancy-prediction", "predict_occ", g * c.trials);
  const auto run = run_policy(fig6_channels(c, c.vacancy_grid[g]), fig6_policy(c), rng);
  std::ostringstream csv;
  run.database.write_csv(csv);
  write_text(fs::path(cfg.output_dir) / "predict_history.csv", csv.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogniscope: cognitive-radio sensing and learning experiments"};
  app.require_subcommand(1);

  CommonOptions run_o, validate_o, fig_o[4], curve_o, lp_o, lm_o, pr_o;

  auto* run = app.add_subcommand("run", "run the experiment named in the config");
  add_common(run, run_o, true);

  auto* validate = app.add_subcommand("validate", "check a config and print it with defaults filled in");
  add_common(validate, validate_o, true);

  CLI::App* figs[4];
  for (std::size_t i = 0; i < 4; ++i) {
    figs[i] = app.add_subcommand(experiment_ids()[i], "run the " + experiment_ids()[i] + " pipeline");
    add_common(figs[i], fig_o[i], false);
  }

  auto* curve = app.add_subcommand("detect-curve", "theoretical (and simulated) detection curves");
  add_common(curve, curve_o, false);
  std::optional<double> fix_pfa;
  std::optional<std::size_t> mc_trials;
  curve->add_option("--fix-pfa", fix_pfa, "hold the idle false-alarm rate fixed")->check(CLI::Range(0.0, 1.0));
  curve->add_option("--mc-trials", mc_trials, "Monte Carlo trials per level (0 disables)");

  auto* lp = app.add_subcommand("learn-power", "power-state clustering and classifier training");
  std::string lp_action;
  lp->add_option("action", lp_action, "cluster | train")->required()->check(CLI::IsMember({"cluster", "train"}));
  add_common(lp, lp_o, false);

  auto* lm = app.add_subcommand("learn-mod", "modulation pattern learning");
  std::string lm_action, model_path;
  lm->add_option("action", lm_action, "fit | classify | update")
      ->required()
      ->check(CLI::IsMember({"fit", "classify", "update"}));
  lm->add_option("--model", model_path, "saved mixture model (classify, update)");
  add_common(lm, lm_o, false);

  auto* pr = app.add_subcommand("predict", "occupancy prediction and channel selection");
  std::string pr_action;
  pr->add_option("action", pr_action, "run")->required()->check(CLI::IsMember({"run"}));
  add_common(pr, pr_o, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      run_and_write(load(run_o));
    } else if (*validate) {
      const auto cfg = load(validate_o);
      for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << '\n';
      std::cout << to_json(cfg).dump(2) << '\n';
    } else if (*curve) {
      auto cfg = load(curve_o, "fig3-detect-curve");
      if (fix_pfa) cfg.fig3.fix_pfa = fix_pfa;
      if (mc_trials) cfg.fig3.monte_carlo_trials = *mc_trials;
      run_and_write(cfg);
    } else if (*lp) {
      learn_power(load(lp_o, "fig4-power-clustering"), lp_action == "train");
    } else if (*lm) {
      learn_mod(load(lm_o, "fig5-modulation-dpgmm"), lm_action, model_path);
    } else if (*pr) {
      predict_run(load(pr_o));
    } else {
      for (std::size_t i = 0; i < 4; ++i)
        if (*figs[i]) run_and_write(load(fig_o[i], experiment_ids()[i]));
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
