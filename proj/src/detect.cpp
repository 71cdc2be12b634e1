#include "cogniscope/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace cogniscope {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_samples(std::size_t n) {
  if (n < 1) throw std::invalid_argument("n_samples must be >= 1");
}

// Roots of a x^2 + b x + c = 0 (real roots only).
std::vector<double> quadratic_roots(double a, double b, double c) {
  std::vector<double> roots;
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  if (scale == 0.0) return roots;
  if (std::abs(a) <= 1e-14 * scale) {
    if (std::abs(b) > 1e-14 * scale) roots.push_back(-c / b);
    return roots;
  }
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return roots;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  roots.push_back(q / a);
  if (q != 0.0) roots.push_back(c / q);
  return roots;
}

std::size_t argmax_level(double x, const HypothesisSet& hyp, std::size_t n,
                         const std::vector<std::size_t>& levels) {
  std::size_t best = levels.front();
  double best_ll = -kInf;
  for (std::size_t i : levels) {
    const double ll = energy_log_likelihood(x, hyp, i, n) + hyp.log_prior(i);
    if (ll > best_ll) {  // strict: ties keep the lower index
      best_ll = ll;
      best = i;
    }
  }
  return best;
}

// Maximal intervals on (lower, inf) with a single ML winner among `levels`.
std::vector<DecisionRegion> partition(const HypothesisSet& hyp, std::size_t n,
                                      const std::vector<std::size_t>& levels, double lower) {
  std::vector<double> cuts;
  for (std::size_t a = 0; a < levels.size(); ++a) {
    for (std::size_t b = a + 1; b < levels.size(); ++b) {
      const std::size_t i = levels[a], j = levels[b];
      const double mi = hyp.mean(i), mj = hyp.mean(j);
      const double vi = hyp.variance(i, n), vj = hyp.variance(j, n);
      const double k = 0.5 * std::log(vj / vi) + hyp.log_prior(i) - hyp.log_prior(j);
      const double qa = 1.0 / (2.0 * vi) - 1.0 / (2.0 * vj);
      const double qb = -mi / vi + mj / vj;
      const double qc = mi * mi / (2.0 * vi) - mj * mj / (2.0 * vj) - k;
      for (double r : quadratic_roots(qa, qb, qc))
        if (std::isfinite(r) && r > lower) cuts.push_back(r);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<DecisionRegion> regions;
  double left = lower;
  for (std::size_t c = 0; c <= cuts.size(); ++c) {
    const double right = c < cuts.size() ? cuts[c] : kInf;
    const double probe = std::isfinite(right) ? 0.5 * (left + right)
                                              : left + std::max(1.0, std::abs(left));
    const std::size_t w = argmax_level(probe, hyp, n, levels);
    if (!regions.empty() && regions.back().level == w) {
      regions.back().upper = right;
    } else {
      regions.push_back({left, right, w});
    }
    left = right;
  }
  return regions;
}

std::vector<std::size_t> all_levels(const HypothesisSet& hyp, std::size_t first) {
  std::vector<std::size_t> v(hyp.size() - first);
  std::iota(v.begin(), v.end(), first);
  return v;
}

}  // namespace

void HypothesisSet::validate(bool allow_coincident) const {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be > 0");
  if (power_levels.empty()) throw std::invalid_argument("hypothesis set is empty");
  if (power_levels.front() != 0.0) throw std::invalid_argument("first power level must be 0");
  for (std::size_t i = 1; i < power_levels.size(); ++i) {
    const bool ok = allow_coincident ? power_levels[i] >= power_levels[i - 1]
                                     : power_levels[i] > power_levels[i - 1];
    if (!ok) throw std::invalid_argument("power levels must be strictly increasing");
  }
  if (priors) {
    if (priors->size() != power_levels.size())
      throw std::invalid_argument("priors must have one entry per level");
    double s = 0.0;
    for (double p : *priors) {
      if (!(p > 0.0)) throw std::invalid_argument("priors must be positive");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("priors must sum to 1");
  }
}

double HypothesisSet::variance(std::size_t level, std::size_t n_samples) const {
  const double m = mean(level);
  return m * m / static_cast<double>(n_samples);
}

double HypothesisSet::log_prior(std::size_t level) const {
  return priors ? std::log((*priors)[level]) : 0.0;
}

double energy_log_likelihood(double mean_energy, const HypothesisSet& hyp, std::size_t level,
                             std::size_t n_samples) {
  const double v = hyp.variance(level, n_samples);
  const double d = mean_energy - hyp.mean(level);
  return -0.5 * std::log(v) - d * d / (2.0 * v);
}

std::size_t ml_decide(double mean_energy, const HypothesisSet& hyp, std::size_t n_samples) {
  if (hyp.power_levels.empty()) throw std::invalid_argument("hypothesis set is empty");
  require_samples(n_samples);
  if (!(mean_energy >= 0.0)) throw std::invalid_argument("mean_energy must be >= 0");
  return argmax_level(mean_energy, hyp, n_samples, all_levels(hyp, 0));
}

std::size_t threshold_decide(double mean_energy, const HypothesisSet& hyp, std::size_t n_samples,
                             double idle_threshold) {
  if (hyp.power_levels.empty()) throw std::invalid_argument("hypothesis set is empty");
  require_samples(n_samples);
  if (mean_energy <= idle_threshold || hyp.size() == 1) return 0;
  return argmax_level(mean_energy, hyp, n_samples, all_levels(hyp, 1));
}

std::vector<DecisionRegion> decision_regions(const HypothesisSet& hyp, std::size_t n_samples,
                                             std::optional<double> idle_threshold) {
  if (hyp.power_levels.empty()) throw std::invalid_argument("hypothesis set is empty");
  require_samples(n_samples);
  if (!idle_threshold || hyp.size() == 1) {
    if (hyp.size() == 1) return {{0.0, kInf, 0}};
    return partition(hyp, n_samples, all_levels(hyp, 0), 0.0);
  }
  const double t = std::max(0.0, *idle_threshold);
  std::vector<DecisionRegion> regions{{0.0, t, 0}};
  for (const auto& r : partition(hyp, n_samples, all_levels(hyp, 1), t)) regions.push_back(r);
  return regions;
}

double energy_cdf(double x, const HypothesisSet& hyp, std::size_t level, std::size_t n_samples,
                  StatisticModel model) {
  if (x == kInf) return 1.0;
  if (x == -kInf) return 0.0;
  const double mu = hyp.mean(level);
  const double n = static_cast<double>(n_samples);
  if (model == StatisticModel::gaussian) {
    boost::math::normal_distribution<double> g(mu, mu / std::sqrt(n));
    return boost::math::cdf(g, x);
  }
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(n, x * n / mu);
}

double idle_threshold_for_pfa(const HypothesisSet& hyp, std::size_t n_samples, double pfa,
                              StatisticModel model) {
  if (!(pfa > 0.0 && pfa < 1.0)) throw std::invalid_argument("fixed Pfa must lie in (0, 1)");
  require_samples(n_samples);
  const double mu = hyp.mean(0);
  const double n = static_cast<double>(n_samples);
  if (model == StatisticModel::gaussian) {
    boost::math::normal_distribution<double> g(mu, mu / std::sqrt(n));
    return boost::math::quantile(boost::math::complement(g, pfa));
  }
  return boost::math::gamma_q_inv(n, pfa) * mu / n;
}

DetectionMetrics metrics_from_confusion(std::vector<std::vector<double>> confusion,
                                        std::size_t n_samples) {
  DetectionMetrics m;
  m.sample_count = n_samples;
  const std::size_t levels = confusion.size();
  m.p_false_alarm = levels > 0 ? 1.0 - confusion[0][0] : 0.0;
  if (levels > 1) {
    double pd = 0.0, pdisc = 0.0;
    for (std::size_t i = 1; i < levels; ++i) {
      pd += 1.0 - confusion[i][0];
      pdisc += confusion[i][i];
    }
    m.p_detection = pd / static_cast<double>(levels - 1);
    m.p_discrimination = pdisc / static_cast<double>(levels - 1);
  }
  m.confusion = std::move(confusion);
  return m;
}

DetectionMetrics theoretical_metrics(const HypothesisSet& hyp, std::size_t n_samples,
                                     const MetricOptions& options) {
  require_samples(n_samples);
  std::optional<double> threshold;
  if (options.fixed_pfa)
    threshold = idle_threshold_for_pfa(hyp, n_samples, *options.fixed_pfa, options.model);
  const auto regions = decision_regions(hyp, n_samples, threshold);

  const std::size_t levels = hyp.size();
  std::vector<std::vector<double>> confusion(levels, std::vector<double>(levels, 0.0));
  for (std::size_t i = 0; i < levels; ++i) {
    for (std::size_t r = 0; r < regions.size(); ++r) {
      // The region touching 0 also absorbs any mass the law puts below 0.
      const double lo = r == 0 ? -kInf : regions[r].lower;
      const double p = energy_cdf(regions[r].upper, hyp, i, n_samples, options.model) -
                       energy_cdf(lo, hyp, i, n_samples, options.model);
      confusion[i][regions[r].level] += std::max(0.0, p);
    }
  }
  return metrics_from_confusion(std::move(confusion), n_samples);
}

MetricCurve metric_curve(const HypothesisSet& hyp, const std::vector<std::size_t>& n_grid,
                         const MetricOptions& options) {
  if (n_grid.empty()) throw std::invalid_argument("n_grid is empty");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end())
    throw std::invalid_argument("n_grid must be strictly ascending");

  MetricCurve curve;
  constexpr double slack = 1e-12;
  for (std::size_t n : n_grid) {
    auto m = theoretical_metrics(hyp, n, options);
    if (!curve.points.empty()) {
      const auto& prev = curve.points.back();
      if (m.p_detection && *m.p_detection + slack < *prev.p_detection)
        curve.pd_non_decreasing = false;
      if (m.p_discrimination && *m.p_discrimination + slack < *prev.p_discrimination)
        curve.pdisc_non_decreasing = false;
    }
    if (m.p_detection && *m.p_discrimination > *m.p_detection + slack) curve.pdisc_below_pd = false;
    curve.points.push_back(std::move(m));
  }
  return curve;
}

}  // namespace cogniscope
