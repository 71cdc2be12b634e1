#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace cogniscope {

/// Schema violation; `key` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct Fig3Config {
  double noise_variance = 1.0;
  std::vector<double> power_levels{0.0, 0.5, 1.0};
  std::vector<std::size_t> n_grid{10, 50, 100, 500, 1000, 5000};
  std::string statistic = "exact_gamma";  // exact_gamma | gaussian
  std::optional<double> fix_pfa;
  std::size_t monte_carlo_trials = 0;   // 0 disables the _mc columns
  std::string mc_signal = "gaussian";   // gaussian | BPSK | QPSK | PSK8 | QAM16
};

struct Fig4Config {
  double snr_db = -12.0;  // mean active power over noise
  double noise_variance = 1.0;
  std::vector<double> active_power_ratios{1.0};
  std::string modulation = "QPSK";
  std::size_t slots_per_frame = 2;
  std::size_t samples_per_slot = 2000;
  std::size_t train_frames_per_state = 300;
  std::size_t test_frames_per_state = 1000;
  std::size_t k_max = 4;
  std::size_t restarts = 10;
  std::string kernel = "linear";  // linear | gaussian
  double svm_c = 1.0;
  double svm_tolerance = 1e-3;
  std::size_t boundary_steps = 101;
  std::size_t trials = 1;
};

struct Fig5Config {
  double snr_db = 10.0;  // mean active power over noise
  double noise_variance = 1.0;
  std::size_t samples_per_vector = 100;
  std::size_t vectors_per_pattern = 200;
  std::size_t holdout_per_pattern = 100;
  std::vector<std::string> modulations{"BPSK", "QPSK", "PSK8", "QAM16"};
  std::vector<double> power_sq_ratios{2.5, 5.0, 5.3, 4.0};
  bool include_idle = true;
  double concentration = 1.0;
  double prior_scale = 0.02;
  double prior_dof = 0.0;
  double prior_precision_scale = 0.01;
  std::size_t n_sweeps = 500;
  std::size_t burn_in = 200;
  double noise_gate = 0.1;
  double dominance = 0.025;
  std::size_t trials = 1;
};

struct Fig6Config {
  std::size_t channels = 25;
  double capacity = 1.0;
  std::size_t budget = 5;
  std::size_t horizon = 2000;
  std::vector<double> vacancy_grid{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  double spread = 0.4;       // channel c gets vacancy grid + spread * (c / (C - 1) - 1/2)
  double persistence = 0.6;  // lag-1 autocorrelation of every channel
  double sensing_error = 0.05;
  double smoothing = 1.0;
  double exploration = 0.5;  // ranking bonus weight, see PolicyConfig
  std::string sensing = "bernoulli";  // bernoulli | energy_detector
  double detector_snr_db = 0.0;
  std::size_t detector_samples = 64;
  std::size_t trials = 20;
};

inline const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{"fig3-detect-curve", "fig4-power-clustering",
                                            "fig5-modulation-dpgmm", "fig6-occupancy-prediction"};
  return ids;
}

struct ExperimentConfig {
  std::string experiment = "fig3-detect-curve";
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::vector<std::string> emit{"csv", "json", "log"};
  Fig3Config fig3;
  Fig4Config fig4;
  Fig5Config fig5;
  Fig6Config fig6;

  /// Unknown keys met while parsing (forward compatibility: warn, do not fail).
  std::vector<std::string> warnings;

  bool emits(const std::string& kind) const;
};

/// Parses and schema-checks a config document; missing keys take defaults.
ExperimentConfig parse_config(const nlohmann::json& doc);

/// Reads a JSON config file. Throws ConfigError on unreadable or invalid input.
ExperimentConfig validate_config(const std::filesystem::path& path);

/// Full config with every default filled in; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

/// FNV-1a over the canonical dump of to_json without output_dir, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace cogniscope
