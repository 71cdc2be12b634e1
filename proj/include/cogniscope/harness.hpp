#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cogniscope/config.hpp"
#include "cogniscope/detect.hpp"
#include "cogniscope/features.hpp"
#include "cogniscope/learn_mod.hpp"
#include "cogniscope/learn_power.hpp"
#include "cogniscope/predict_occ.hpp"

namespace cogniscope {

/// Shortest round-trip decimal form; "-0" prints as "0".
std::string format_number(double v);

struct CsvTable {
  std::string name;  // file name inside the output directory
  std::string content;
};

struct ResultBundle {
  std::string experiment;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<CsvTable> tables;
  nlohmann::json summary;
  std::vector<std::string> log;
};

/// Runs the named pipeline. Unknown ids raise ConfigError.
ResultBundle run_experiment(const ExperimentConfig& config);

/// Writes `<id>_<table>.csv`, `<id>_summary.json`, `<id>.log` as enabled by `emit`.
void write_bundle(const ResultBundle& bundle, const ExperimentConfig& config);

// ---- fig3: multi-level detection curves ------------------------------------

HypothesisSet fig3_hypotheses(const Fig3Config& config);
MetricOptions fig3_options(const Fig3Config& config);

/// Simulated confusion of ml_decide (or threshold_decide with `idle_threshold`).
/// Signal "gaussian" draws CN(0, P + sigma^2) samples; n > 256 uses the exact
/// Gamma law of their averaged energy instead of summing samples.
DetectionMetrics monte_carlo_metrics(const HypothesisSet& hyp, std::size_t n_samples,
                                     std::size_t trials, const std::string& signal,
                                     std::optional<double> idle_threshold, Rng& rng);

struct Fig3Result {
  MetricCurve curve;
  std::vector<DetectionMetrics> monte_carlo;  // empty when disabled
};

Fig3Result run_fig3(const Fig3Config& config, std::uint64_t seed);

// ---- fig4: power-state clustering and margin classifier --------------------

struct Fig4Trial {
  std::vector<double> true_powers;  // ascending, first is 0
  std::vector<EnergyFeatureVector> train;
  std::vector<EnergyFeatureVector> test;
  std::vector<int> test_labels;
  ClusteringResult clustering;
  PowerStateEstimate states;
  std::optional<MarginClassifier> classifier;  // absent when only one state was found
  double test_accuracy = 0.0;
  double bayes_accuracy = 0.0;
};

std::vector<double> fig4_power_levels(const Fig4Config& config);

/// Log-likelihood of an energy vector under a true state, from the generator
/// parameters (exact noncentral chi-square for constant-modulus signals).
double fig4_state_log_likelihood(const Fig4Config& config, double power, const EnergyFeatureVector& v);

Fig4Trial run_fig4_trial(const Fig4Config& config, std::uint64_t seed, std::size_t trial);

// ---- fig5: modulation patterns by DPGMM ------------------------------------

struct Fig5Pattern {
  ModulationType modulation = ModulationType::NOISE_ONLY;
  double power = 0.0;
};

std::vector<Fig5Pattern> fig5_patterns(const Fig5Config& config);
DPGMMConfig fig5_dpgmm_config(const Fig5Config& config, std::uint64_t seed);

struct Fig5Trial {
  std::vector<Fig5Pattern> patterns;
  std::vector<CumulantVector> train;
  MixtureModel model;
  NoiseIdentification noise;
  PatternMatch match;
  std::size_t dominant_components = 0;
  bool modulations_correct = false;
  /// Per configured modulation: estimated squared-power share / true share (NaN if unmatched).
  std::vector<double> ratio_quotients;
  double holdout_accuracy = 0.0;
};

Fig5Trial run_fig5_trial(const Fig5Config& config, std::uint64_t seed, std::size_t trial);

/// `component,weight,mu_c21,mu_c40,mu_c42,matched_mod,est_power`, one row per component.
std::string fig5_components_csv(const Fig5Trial& trial);

// ---- fig6: occupancy prediction --------------------------------------------

std::vector<TwoStateMarkov> fig6_channels(const Fig6Config& config, double vacancy);
PolicyConfig fig6_policy(const Fig6Config& config);

struct Fig6Point {
  double vacancy = 0.0;
  std::vector<ThroughputReport> trials;
  double mean_learned = 0.0;
  double mean_random = 0.0;
  double mean_prediction_error = 0.0;
  double diff_mean = 0.0;       // learned - random
  double diff_std_error = 0.0;  // over trials
};

std::vector<Fig6Point> run_fig6(const Fig6Config& config, std::uint64_t seed);

}  // namespace cogniscope
