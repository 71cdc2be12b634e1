#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "cogniscope/linalg.hpp"

namespace cogniscope {

/// Dirichlet-process Gaussian mixture with a normal-inverse-Wishart base measure.
///
/// Data are standardized per coordinate (shift by the mean, divide by the
/// standard deviation of the fitted set) and the base measure lives in that
/// space:  mu | Sigma ~ N(prior_mean, Sigma / prior_precision_scale),
///         Sigma ~ IW(prior_scale * I, prior_dof).
/// In original units that is a scale matrix of prior_scale * diag(data variance).
struct DPGMMConfig {
  double concentration = 1.0;
  std::vector<double> prior_mean;  // original units; empty means the data mean
  double prior_scale = 0.02;
  double prior_dof = 0.0;  // 0 means dim + 2
  double prior_precision_scale = 0.01;
  std::size_t n_sweeps = 500;
  std::size_t burn_in = 200;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument on improper hyperparameters.
  void validate(std::size_t dim) const;
  double dof_for(std::size_t dim) const { return prior_dof > 0.0 ? prior_dof : dim + 2.0; }
};

struct NiwPrior {
  std::vector<double> mean;
  double kappa = 0.0;
  double dof = 0.0;
  SquareMatrix scale;
};

struct MixtureComponent {
  double weight = 0.0;
  std::size_t count = 0;
  std::vector<double> mean;   // posterior mean, original units
  SquareMatrix covariance;    // posterior mean of Sigma, original units
  SquareMatrix cholesky;      // lower factor of `covariance`
};

struct MixtureModel {
  std::size_t dim = 0;
  std::vector<MixtureComponent> components;  // sorted by descending count

  DPGMMConfig config;
  std::vector<double> shift;  // standardization
  std::vector<double> scale;
  NiwPrior prior;             // standardized space
  std::vector<std::vector<double>> data;     // original units
  std::vector<std::size_t> assignments;      // mode partition

  std::vector<std::size_t> components_per_sweep;
  std::vector<double> log_posterior_per_sweep;
  std::size_t mode_sweep = 0;
  double mode_log_posterior = 0.0;

  /// Components holding at least `threshold` of the data.
  std::vector<std::size_t> dominant(double threshold = 0.025) const;
};

/// Collapsed Gibbs sampling under a Chinese-restaurant-process prior. Returns
/// the post-burn-in sweep with the highest joint posterior. Needs >= 10 vectors.
MixtureModel dpgmm_fit(const std::vector<std::vector<double>>& vectors, const DPGMMConfig& config);

/// Appends vectors to a fitted model and resumes sweeping with the model's
/// standardization and base measure. An empty batch returns the model unchanged.
MixtureModel dpgmm_update(const MixtureModel& model,
                          const std::vector<std::vector<double>>& new_vectors,
                          const DPGMMConfig& config);

struct PredictiveScores {
  std::vector<double> log_component;  // log(n_k / (N + alpha)) + log t_k(x)
  double log_new = 0.0;               // log(alpha / (N + alpha)) + log t_0(x)
};

/// Posterior predictive of the CRP mixture, evaluated in original units.
PredictiveScores predictive_scores(const MixtureModel& model, const std::vector<double>& x);

/// Joint log posterior log p(partition) + sum_k log p(X_k) of a partition of
/// standardized data.
double partition_log_posterior(const std::vector<std::vector<double>>& standardized,
                               const std::vector<std::size_t>& assignments,
                               const NiwPrior& prior, double concentration);

void save_mixture(const MixtureModel& model, std::ostream& out);
MixtureModel load_mixture(std::istream& in);

}  // namespace cogniscope
