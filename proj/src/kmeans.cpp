#include "cogniscope/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

namespace cogniscope {

namespace {

double sq_dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<Point> plus_plus_seeds(const std::vector<Point>& points, std::size_t k, Rng& rng) {
  std::vector<Point> seeds;
  std::uniform_int_distribution<std::size_t> first(0, points.size() - 1);
  seeds.push_back(points[first(rng)]);
  std::vector<double> d2(points.size(), std::numeric_limits<double>::infinity());
  while (seeds.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      d2[i] = std::min(d2[i], sq_dist(points[i], seeds.back()));
      total += d2[i];
    }
    if (total <= 0.0) break;
    std::uniform_real_distribution<double> u(0.0, total);
    double r = u(rng);
    std::size_t pick = points.size() - 1;
    for (std::size_t i = 0; i < points.size(); ++i) {
      r -= d2[i];
      if (r <= 0.0 && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    seeds.push_back(points[pick]);
  }
  return seeds;
}

KMeansResult lloyd(const std::vector<Point>& points, std::vector<Point> centroids,
                   std::size_t max_iterations) {
  const std::size_t k = centroids.size();
  const std::size_t dim = points.front().size();
  KMeansResult r;
  r.k = k;
  r.assignments.assign(points.size(), 0);
  for (std::size_t it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double d = sq_dist(points[i], centroids[c]);
        if (d < bd) {
          bd = d;
          best = c;
        }
      }
      if (it == 0 || best != r.assignments[i]) changed = true;
      r.assignments[i] = best;
    }
    // Recenter; an emptied cluster keeps its old centroid.
    std::vector<Point> sums(k, Point(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
      ++counts[r.assignments[i]];
      for (std::size_t d = 0; d < dim; ++d) sums[r.assignments[i]][d] += points[i][d];
    }
    for (std::size_t c = 0; c < k; ++c)
      if (counts[c] > 0)
        for (std::size_t d = 0; d < dim; ++d) centroids[c][d] = sums[c][d] / counts[c];
    double after = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i)
      after += sq_dist(points[i], centroids[r.assignments[i]]);
    r.sse_trace.push_back(after);
    r.sse = after;
    if (!changed) break;
  }
  r.centroids = std::move(centroids);
  return r;
}

}  // namespace

std::size_t count_distinct(const std::vector<Point>& points) {
  std::set<Point> s(points.begin(), points.end());
  return s.size();
}

KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::size_t restarts,
                    Rng& rng, std::size_t max_iterations) {
  if (points.empty() || k < 1) throw std::invalid_argument("kmeans needs points and k >= 1");
  if (count_distinct(points) < k)
    throw std::invalid_argument("kmeans needs at least k distinct points");
  KMeansResult best;
  best.sse = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < std::max<std::size_t>(1, restarts); ++r) {
    auto fit = lloyd(points, plus_plus_seeds(points, k, rng), max_iterations);
    if (fit.sse < best.sse) best = std::move(fit);
  }
  return best;
}

double spherical_bic(const std::vector<Point>& points, const KMeansResult& fit) {
  const double n = static_cast<double>(points.size());
  const std::size_t dim = points.front().size();
  const double d = static_cast<double>(dim);

  // Floor per-cluster variance relative to the overall spread.
  Point mean(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t j = 0; j < dim; ++j) mean[j] += p[j] / n;
  double total_var = 0.0;
  for (const auto& p : points) total_var += sq_dist(p, mean);
  total_var /= n * d;
  const double floor = std::max(1e-6 * total_var, 1e-300);

  std::vector<double> sse(fit.k, 0.0);
  std::vector<double> count(fit.k, 0.0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    sse[fit.assignments[i]] += sq_dist(points[i], fit.centroids[fit.assignments[i]]);
    count[fit.assignments[i]] += 1.0;
  }
  double loglik = 0.0;
  for (std::size_t c = 0; c < fit.k; ++c) {
    if (count[c] < 2.0) return std::numeric_limits<double>::infinity();
    const double var = std::max(sse[c] / (count[c] * d), floor);
    loglik += count[c] * std::log(count[c] / n) -
              0.5 * count[c] * d * std::log(2.0 * std::numbers::pi * var) - 0.5 * count[c] * d;
  }
  const double params = static_cast<double>(fit.k) * (d + 1.0) + static_cast<double>(fit.k - 1);
  return -2.0 * loglik + params * std::log(n);
}

KSelection select_k_bic(const std::vector<Point>& points, std::size_t k_max, std::size_t restarts,
                        Rng& rng) {
  if (k_max < 1) throw std::invalid_argument("k_max must be >= 1");
  const std::size_t distinct = count_distinct(points);
  KSelection sel;
  sel.bic = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= k_max; ++k) {
    if (k > distinct) {
      sel.bic_by_k.push_back(std::numeric_limits<double>::infinity());
      continue;
    }
    auto fit = kmeans(points, k, restarts, rng);
    const double bic = distinct == 1 ? 0.0 : spherical_bic(points, fit);
    sel.bic_by_k.push_back(bic);
    if (bic < sel.bic || sel.best.k == 0) {
      sel.bic = bic;
      sel.best = std::move(fit);
    }
  }
  return sel;
}

}  // namespace cogniscope
