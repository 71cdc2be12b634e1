#pragma once

#include <cstddef>
#include <vector>

#include "cogniscope/rng.hpp"

namespace cogniscope {

using Point = std::vector<double>;

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<Point> centroids;
  std::size_t k = 0;
  double sse = 0.0;
  /// Within-cluster SSE after every Lloyd iteration of the winning restart.
  std::vector<double> sse_trace;
};

/// Lloyd iterations from k-means++ seeds; best of `restarts` by SSE.
/// Requires at least k distinct points.
KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::size_t restarts,
                    Rng& rng, std::size_t max_iterations = 300);

/// BIC (lower is better) of a partition under spherical Gaussians with one
/// variance per cluster and mixing weights n_k / N.
double spherical_bic(const std::vector<Point>& points, const KMeansResult& fit);

struct KSelection {
  KMeansResult best;
  double bic = 0.0;
  std::vector<double> bic_by_k;  // index k-1; +inf where k was infeasible
};

/// k in [1, k_max] minimizing spherical_bic.
KSelection select_k_bic(const std::vector<Point>& points, std::size_t k_max, std::size_t restarts,
                        Rng& rng);

std::size_t count_distinct(const std::vector<Point>& points);

}  // namespace cogniscope
