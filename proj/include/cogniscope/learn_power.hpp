#pragma once

#include <cstddef>
#include <vector>

#include "cogniscope/features.hpp"
#include "cogniscope/kmeans.hpp"
#include "cogniscope/margin_classifier.hpp"
#include "cogniscope/rng.hpp"

namespace cogniscope {

/// Power-state discovery from energy feature vectors.
struct ClusteringResult {
  std::vector<std::size_t> assignments;
  std::vector<std::vector<double>> centroids;  // original energy units
  std::size_t k = 0;
  double model_score = 0.0;  // BIC of the selected k (lower is better)
  std::vector<double> score_by_k;
  /// Global mean energy the features were divided by before clustering.
  double normalizer = 1.0;
  std::vector<double> sse_trace;  // normalized units, winning restart
};

struct ClusterOptions {
  std::size_t k_max = 4;
  std::size_t restarts = 10;
};

/// k-means with restarts; k chosen by spherical-Gaussian BIC. Requires at
/// least 10 * k_max vectors of one common dimension.
ClusteringResult cluster_energy(const std::vector<EnergyFeatureVector>& vectors,
                                const ClusterOptions& options, Rng& rng);

struct PowerStateEstimate {
  double noise_energy = 0.0;
  std::vector<double> state_powers;         // ascending, state_powers[0] == 0
  std::vector<std::size_t> cluster_to_state;
};

/// The lowest-energy cluster is the noise state; other states are measured
/// relative to it and clamped at 0.
PowerStateEstimate estimate_power_states(const ClusteringResult& result);

/// Each vector labelled with the power state of its cluster.
std::vector<LabeledVector> label_by_state(const std::vector<EnergyFeatureVector>& vectors,
                                          const ClusteringResult& result,
                                          const PowerStateEstimate& states);

MarginClassifier train_classifier(const std::vector<LabeledVector>& labeled, Kernel::Kind kernel,
                                  const SvmConfig& config);

/// One-vs-one vote winner; throws std::invalid_argument on a dimension mismatch.
int classify(const MarginClassifier& clf, const EnergyFeatureVector& vector);

struct BoundaryPoint {
  double e0 = 0.0;
  double e1 = 0.0;
  int decision = 0;
};

/// Decision map over a rectangular grid for two-slot features.
std::vector<BoundaryPoint> sample_boundary(const MarginClassifier& clf, double e0_min,
                                           double e0_max, double e1_min, double e1_max,
                                           std::size_t steps);

}  // namespace cogniscope
