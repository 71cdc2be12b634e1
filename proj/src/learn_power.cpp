#include "cogniscope/learn_power.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace cogniscope {

ClusteringResult cluster_energy(const std::vector<EnergyFeatureVector>& vectors,
                                const ClusterOptions& options, Rng& rng) {
  if (options.k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  if (vectors.size() < 10 * options.k_max)
    throw std::invalid_argument("clustering needs at least 10 * k_max vectors (" +
                                std::to_string(10 * options.k_max) + "), got " +
                                std::to_string(vectors.size()));
  const std::size_t dim = vectors.front().energies.size();
  if (dim == 0) throw std::invalid_argument("empty energy vectors");

  double total = 0.0;
  for (const auto& v : vectors) {
    if (v.energies.size() != dim) throw std::invalid_argument("ragged energy vectors");
    for (double e : v.energies) total += e;
  }
  ClusteringResult out;
  const double mean = total / static_cast<double>(vectors.size() * dim);
  out.normalizer = mean > 0.0 ? mean : 1.0;

  std::vector<Point> points;
  points.reserve(vectors.size());
  for (const auto& v : vectors) {
    Point p = v.energies;
    for (double& e : p) e /= out.normalizer;
    points.push_back(std::move(p));
  }

  auto sel = select_k_bic(points, options.k_max, options.restarts, rng);
  out.k = sel.best.k;
  out.model_score = sel.bic;
  out.score_by_k = sel.bic_by_k;
  out.sse_trace = sel.best.sse_trace;
  out.assignments = sel.best.assignments;

  // Centroids as exact member means in original units.
  out.centroids.assign(out.k, std::vector<double>(dim, 0.0));
  std::vector<std::size_t> counts(out.k, 0);
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    ++counts[out.assignments[i]];
    for (std::size_t d = 0; d < dim; ++d) out.centroids[out.assignments[i]][d] += vectors[i].energies[d];
  }
  for (std::size_t c = 0; c < out.k; ++c)
    for (double& e : out.centroids[c]) e = counts[c] ? e / static_cast<double>(counts[c]) : 0.0;
  return out;
}

PowerStateEstimate estimate_power_states(const ClusteringResult& result) {
  if (result.k == 0 || result.centroids.size() != result.k)
    throw std::invalid_argument("invalid clustering result");
  std::vector<double> level(result.k);
  for (std::size_t c = 0; c < result.k; ++c) {
    const auto& cen = result.centroids[c];
    level[c] = std::accumulate(cen.begin(), cen.end(), 0.0) / static_cast<double>(cen.size());
  }
  std::vector<std::size_t> order(result.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return level[a] < level[b]; });

  PowerStateEstimate est;
  est.noise_energy = level[order.front()];
  est.cluster_to_state.assign(result.k, 0);
  for (std::size_t s = 0; s < order.size(); ++s) {
    est.cluster_to_state[order[s]] = s;
    est.state_powers.push_back(std::max(0.0, level[order[s]] - est.noise_energy));
  }
  return est;
}

std::vector<LabeledVector> label_by_state(const std::vector<EnergyFeatureVector>& vectors,
                                          const ClusteringResult& result,
                                          const PowerStateEstimate& states) {
  if (vectors.size() != result.assignments.size())
    throw std::invalid_argument("vectors and clustering assignments differ in length");
  std::vector<LabeledVector> out;
  out.reserve(vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i)
    out.push_back({vectors[i].energies,
                   static_cast<int>(states.cluster_to_state[result.assignments[i]])});
  return out;
}

MarginClassifier train_classifier(const std::vector<LabeledVector>& labeled, Kernel::Kind kernel,
                                  const SvmConfig& config) {
  return train_margin_classifier(labeled, kernel, config);
}

int classify(const MarginClassifier& clf, const EnergyFeatureVector& vector) {
  return classify_features(clf, vector.energies);
}

std::vector<BoundaryPoint> sample_boundary(const MarginClassifier& clf, double e0_min,
                                           double e0_max, double e1_min, double e1_max,
                                           std::size_t steps) {
  if (clf.dim != 2) throw std::invalid_argument("boundary sampling needs two-slot features");
  if (steps < 2) throw std::invalid_argument("boundary grid needs >= 2 steps per axis");
  std::vector<BoundaryPoint> grid;
  grid.reserve(steps * steps);
  for (std::size_t a = 0; a < steps; ++a) {
    const double e0 = e0_min + (e0_max - e0_min) * static_cast<double>(a) / (steps - 1);
    for (std::size_t b = 0; b < steps; ++b) {
      const double e1 = e1_min + (e1_max - e1_min) * static_cast<double>(b) / (steps - 1);
      grid.push_back({e0, e1, classify_features(clf, {e0, e1})});
    }
  }
  return grid;
}

}  // namespace cogniscope
