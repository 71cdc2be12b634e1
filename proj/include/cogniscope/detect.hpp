#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace cogniscope {

/// Prior-sufficient knowledge: noise variance plus the candidate power levels
/// (level 0 is idle and is exactly 0).
struct HypothesisSet {
  double noise_variance = 1.0;
  std::vector<double> power_levels{0.0};
  std::optional<std::vector<double>> priors;

  /// Throws std::invalid_argument. Strictly increasing levels are required unless
  /// `allow_coincident` is set (used to study indistinguishable hypotheses).
  void validate(bool allow_coincident = false) const;
  std::size_t size() const { return power_levels.size(); }
  double mean(std::size_t level) const { return noise_variance + power_levels[level]; }
  /// Variance of the averaged energy statistic under the Gaussian approximation.
  double variance(std::size_t level, std::size_t n_samples) const;
  double log_prior(std::size_t level) const;
};

/// Log-likelihood of an averaged energy under level `level` (Gaussian approximation).
double energy_log_likelihood(double mean_energy, const HypothesisSet& hyp, std::size_t level,
                             std::size_t n_samples);

/// ML (MAP when priors are given) level decision; ties go to the lowest index.
std::size_t ml_decide(double mean_energy, const HypothesisSet& hyp, std::size_t n_samples);

/// Half-open interval (lower, upper] of mean energy mapped to one level.
struct DecisionRegion {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t level = 0;
};

/// Partition of [0, inf) into maximal intervals with a single winning level.
/// With `idle_threshold`, [0, threshold] maps to idle and the active levels share the rest.
std::vector<DecisionRegion> decision_regions(const HypothesisSet& hyp, std::size_t n_samples,
                                             std::optional<double> idle_threshold = std::nullopt);

/// Level decision using a fixed idle threshold (Neyman-Pearson style), then ML among
/// the active levels.
std::size_t threshold_decide(double mean_energy, const HypothesisSet& hyp, std::size_t n_samples,
                             double idle_threshold);

/// Law used to integrate the decision regions.
enum class StatisticModel {
  /// Averaged energy of a Gaussian-like signal: Gamma(n, (sigma^2 + P) / n).
  exact_gamma,
  /// N(sigma^2 + P, (sigma^2 + P)^2 / n).
  gaussian,
};

struct DetectionMetrics {
  double p_false_alarm = 0.0;
  std::optional<double> p_detection;       // absent when no active level exists
  std::optional<double> p_discrimination;  // absent when no active level exists
  std::size_t sample_count = 0;
  /// confusion[i][j] = P(decide j | true level i).
  std::vector<std::vector<double>> confusion;
};

/// Pfa, Pd and Pdisc from a confusion matrix (uniform average over active levels).
DetectionMetrics metrics_from_confusion(std::vector<std::vector<double>> confusion,
                                        std::size_t n_samples);

/// P(averaged energy <= x | level) under the chosen law.
double energy_cdf(double x, const HypothesisSet& hyp, std::size_t level, std::size_t n_samples,
                  StatisticModel model);

/// Idle threshold giving false-alarm probability `pfa` under the chosen law.
double idle_threshold_for_pfa(const HypothesisSet& hyp, std::size_t n_samples, double pfa,
                              StatisticModel model);

struct MetricOptions {
  StatisticModel model = StatisticModel::exact_gamma;
  std::optional<double> fixed_pfa;  // apply a fixed-false-alarm idle threshold
};

DetectionMetrics theoretical_metrics(const HypothesisSet& hyp, std::size_t n_samples,
                                     const MetricOptions& options = {});

struct MetricCurve {
  std::vector<DetectionMetrics> points;
  bool pd_non_decreasing = true;
  bool pdisc_non_decreasing = true;
  bool pdisc_below_pd = true;
};

/// Throws std::invalid_argument for an empty or non-ascending grid.
MetricCurve metric_curve(const HypothesisSet& hyp, const std::vector<std::size_t>& n_grid,
                         const MetricOptions& options = {});

}  // namespace cogniscope
