#include "cogniscope/dpgmm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "cogniscope/rng.hpp"

namespace cogniscope {

namespace {

using Vec = std::vector<double>;

struct NiwPosterior {
  double kappa = 0.0;
  double dof = 0.0;
  Vec mean;
  SquareMatrix scale;
};

struct Suff {
  std::size_t n = 0;
  Vec sum;
  SquareMatrix outer;

  explicit Suff(std::size_t dim = 0) : sum(dim, 0.0), outer(dim) {}
  void add(const Vec& x, double s) {
    n = s > 0 ? n + 1 : n - 1;
    for (std::size_t i = 0; i < x.size(); ++i) sum[i] += s * x[i];
    outer.add_outer(x, s);
  }
};

NiwPosterior posterior(const NiwPrior& p, const Suff& s) {
  const std::size_t d = p.mean.size();
  NiwPosterior q;
  const double n = static_cast<double>(s.n);
  q.kappa = p.kappa + n;
  q.dof = p.dof + n;
  q.mean.resize(d);
  for (std::size_t i = 0; i < d; ++i) q.mean[i] = (p.kappa * p.mean[i] + s.sum[i]) / q.kappa;
  q.scale = p.scale;
  if (s.n > 0) {
    Vec xbar(d), diff(d);
    for (std::size_t i = 0; i < d; ++i) {
      xbar[i] = s.sum[i] / n;
      diff[i] = xbar[i] - p.mean[i];
    }
    q.scale += s.outer;
    q.scale.add_outer(xbar, -n);
    q.scale.add_outer(diff, p.kappa * n / q.kappa);
  }
  return q;
}

// Multivariate Student-t posterior predictive.
struct Predictive {
  Vec mean;
  SquareMatrix chol;
  double df = 0.0;
  double log_norm = 0.0;

  double log_density(const Vec& x) const {
    const std::size_t d = mean.size();
    Vec diff(d);
    for (std::size_t i = 0; i < d; ++i) diff[i] = x[i] - mean[i];
    const double q = mahalanobis_sq(chol, diff);
    return log_norm - 0.5 * (df + static_cast<double>(d)) * std::log1p(q / df);
  }
};

Predictive make_predictive(const NiwPosterior& q) {
  const double d = static_cast<double>(q.mean.size());
  Predictive pr;
  pr.mean = q.mean;
  pr.df = q.dof - d + 1.0;
  SquareMatrix sigma = q.scale;
  sigma *= (q.kappa + 1.0) / (q.kappa * pr.df);
  auto l = cholesky(sigma);
  if (!l) {
    // Symmetrize and jitter; the scale matrix is PD in exact arithmetic.
    for (std::size_t r = 0; r < sigma.n; ++r)
      for (std::size_t c = 0; c < r; ++c) sigma(r, c) = sigma(c, r) = 0.5 * (sigma(r, c) + sigma(c, r));
    for (std::size_t r = 0; r < sigma.n; ++r) sigma(r, r) += 1e-10;
    l = cholesky(sigma);
    if (!l) throw std::runtime_error("DPGMM predictive scale lost positive definiteness");
  }
  pr.chol = *l;
  pr.log_norm = std::lgamma(0.5 * (pr.df + d)) - std::lgamma(0.5 * pr.df) -
                0.5 * d * std::log(pr.df * std::numbers::pi) - 0.5 * log_det_from_cholesky(pr.chol);
  return pr;
}

double log_marginal(const NiwPrior& p, const Suff& s) {
  const std::size_t d = p.mean.size();
  const double dd = static_cast<double>(d);
  const auto q = posterior(p, s);
  const auto l0 = cholesky(p.scale);
  const auto ln = cholesky(q.scale);
  if (!l0 || !ln) throw std::runtime_error("DPGMM scale matrix lost positive definiteness");
  return -0.5 * static_cast<double>(s.n) * dd * std::log(std::numbers::pi) +
         log_multigamma(0.5 * q.dof, d) - log_multigamma(0.5 * p.dof, d) +
         0.5 * p.dof * log_det_from_cholesky(*l0) - 0.5 * q.dof * log_det_from_cholesky(*ln) +
         0.5 * dd * std::log(p.kappa / q.kappa);
}

struct Slot {
  Suff stats;
  Predictive pred;
  bool dirty = true;
};

struct GibbsOutcome {
  std::vector<std::size_t> mode;
  std::vector<std::size_t> k_trace;
  std::vector<double> lp_trace;
  std::size_t mode_sweep = 0;
  double mode_lp = -std::numeric_limits<double>::infinity();
};

std::size_t sample_log(const std::vector<double>& logw, Rng& rng) {
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  std::vector<double> w(logw.size());
  for (std::size_t i = 0; i < logw.size(); ++i) total += (w[i] = std::exp(logw[i] - mx));
  std::uniform_real_distribution<double> u(0.0, total);
  double r = u(rng);
  for (std::size_t i = 0; i < w.size(); ++i) {
    r -= w[i];
    if (r < 0.0) return i;
  }
  return w.size() - 1;
}

// Relabels a partition to 0..K-1 by descending size, ties by first member.
std::vector<std::size_t> canonical(const std::vector<std::size_t>& z) {
  std::map<std::size_t, std::pair<std::size_t, std::size_t>> info;  // label -> (count, first)
  for (std::size_t i = 0; i < z.size(); ++i) {
    auto [it, fresh] = info.try_emplace(z[i], 0, i);
    ++it->second.first;
  }
  std::vector<std::pair<std::size_t, std::pair<std::size_t, std::size_t>>> order(info.begin(), info.end());
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.second.first != b.second.first) return a.second.first > b.second.first;
    return a.second.second < b.second.second;
  });
  std::map<std::size_t, std::size_t> relabel;
  for (std::size_t k = 0; k < order.size(); ++k) relabel[order[k].first] = k;
  std::vector<std::size_t> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = relabel[z[i]];
  return out;
}

// `initial` covers a prefix of the data; the rest is seated sequentially.
GibbsOutcome run_gibbs(const std::vector<Vec>& x, std::vector<std::size_t> initial,
                       const NiwPrior& prior, double alpha, std::size_t sweeps,
                       std::size_t burn_in, Rng& rng) {
  const std::size_t n = x.size();
  const std::size_t d = prior.mean.size();
  const Predictive prior_pred = make_predictive(posterior(prior, Suff(d)));
  const double log_alpha = std::log(alpha);

  std::vector<Slot> slots;
  std::vector<std::size_t> z(n, 0);
  auto refresh = [&](Slot& s) {
    if (s.dirty) {
      s.pred = make_predictive(posterior(prior, s.stats));
      s.dirty = false;
    }
  };
  auto seat = [&](std::size_t i, std::size_t slot) {
    if (slot == slots.size()) slots.push_back(Slot{Suff(d), {}, true});
    slots[slot].stats.add(x[i], +1.0);
    slots[slot].dirty = true;
    z[i] = slot;
  };
  std::vector<double> logw;
  std::vector<std::size_t> cand;
  auto choose = [&](std::size_t i) {
    logw.clear();
    cand.clear();
    std::size_t empty = slots.size();
    for (std::size_t s = 0; s < slots.size(); ++s) {
      if (slots[s].stats.n == 0) {
        if (empty == slots.size()) empty = s;
        continue;
      }
      refresh(slots[s]);
      logw.push_back(std::log(static_cast<double>(slots[s].stats.n)) + slots[s].pred.log_density(x[i]));
      cand.push_back(s);
    }
    logw.push_back(log_alpha + prior_pred.log_density(x[i]));
    cand.push_back(empty);
    return cand[sample_log(logw, rng)];
  };

  {
    const auto init = canonical(initial);
    // Labels are ordered by size, not first appearance.
    for (auto a : init)
      while (slots.size() <= a) slots.push_back(Slot{Suff(d), {}, true});
    for (std::size_t i = 0; i < init.size(); ++i) seat(i, init[i]);
    for (std::size_t i = init.size(); i < n; ++i) seat(i, choose(i));
  }

  GibbsOutcome out;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      slots[z[i]].stats.add(x[i], -1.0);
      slots[z[i]].dirty = true;
      seat(i, choose(i));
    }
    std::size_t k = 0;
    for (const auto& s : slots) k += s.stats.n > 0;
    out.k_trace.push_back(k);
    const double lp = partition_log_posterior(x, z, prior, alpha);
    out.lp_trace.push_back(lp);
    if (sweep >= burn_in && lp > out.mode_lp) {
      out.mode_lp = lp;
      out.mode = z;
      out.mode_sweep = sweep;
    }
  }
  if (out.mode.empty()) {
    out.mode = z;
    out.mode_lp = partition_log_posterior(x, z, prior, alpha);
  }
  out.mode = canonical(out.mode);
  return out;
}

std::vector<Vec> standardize(const MixtureModel& m, const std::vector<Vec>& raw) {
  std::vector<Vec> out;
  out.reserve(raw.size());
  for (const auto& v : raw) {
    Vec s(m.dim);
    for (std::size_t j = 0; j < m.dim; ++j) s[j] = (v[j] - m.shift[j]) / m.scale[j];
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Suff> component_stats(const MixtureModel& m) {
  const auto z = standardize(m, m.data);
  std::size_t k = 0;
  for (auto a : m.assignments) k = std::max(k, a + 1);
  std::vector<Suff> stats(k, Suff(m.dim));
  for (std::size_t i = 0; i < z.size(); ++i) stats[m.assignments[i]].add(z[i], +1.0);
  return stats;
}

void rebuild_components(MixtureModel& m) {
  const auto stats = component_stats(m);
  const double total = static_cast<double>(m.data.size());
  const double d = static_cast<double>(m.dim);
  m.components.clear();
  for (const auto& s : stats) {
    const auto q = posterior(m.prior, s);
    MixtureComponent c;
    c.count = s.n;
    c.weight = static_cast<double>(s.n) / total;
    c.mean.resize(m.dim);
    for (std::size_t j = 0; j < m.dim; ++j) c.mean[j] = m.shift[j] + m.scale[j] * q.mean[j];
    const double denom = q.dof > d + 1.0 ? q.dof - d - 1.0 : q.dof + d + 1.0;
    c.covariance = SquareMatrix(m.dim);
    for (std::size_t r = 0; r < m.dim; ++r)
      for (std::size_t col = 0; col < m.dim; ++col)
        c.covariance(r, col) = q.scale(r, col) / denom * m.scale[r] * m.scale[col];
    auto l = cholesky(c.covariance);
    if (!l) throw std::runtime_error("mixture component covariance is not positive definite");
    c.cholesky = *l;
    m.components.push_back(std::move(c));
  }
}

void check_vectors(const std::vector<Vec>& v, std::size_t dim) {
  for (const auto& x : v) {
    if (x.size() != dim) throw std::invalid_argument("vector dimension mismatch");
    for (double e : x)
      if (!std::isfinite(e)) throw std::invalid_argument("non-finite feature value");
  }
}

}  // namespace

void DPGMMConfig::validate(std::size_t dim) const {
  if (!(concentration > 0.0)) throw std::invalid_argument("concentration must be > 0");
  if (!(prior_scale > 0.0)) throw std::invalid_argument("prior_scale must be > 0");
  if (!(prior_precision_scale > 0.0)) throw std::invalid_argument("prior_precision_scale must be > 0");
  if (prior_dof != 0.0 && !(prior_dof > static_cast<double>(dim) - 1.0))
    throw std::invalid_argument("prior_dof must exceed dim - 1");
  if (n_sweeps < 1 || burn_in >= n_sweeps) throw std::invalid_argument("burn_in must be < n_sweeps");
  if (!prior_mean.empty() && prior_mean.size() != dim)
    throw std::invalid_argument("prior_mean dimension mismatch");
}

std::vector<std::size_t> MixtureModel::dominant(double threshold) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < components.size(); ++k)
    if (components[k].weight >= threshold) out.push_back(k);
  return out;
}

double partition_log_posterior(const std::vector<Vec>& standardized,
                               const std::vector<std::size_t>& assignments, const NiwPrior& prior,
                               double concentration) {
  std::map<std::size_t, Suff> stats;
  for (std::size_t i = 0; i < standardized.size(); ++i) {
    auto [it, fresh] = stats.try_emplace(assignments[i], prior.mean.size());
    it->second.add(standardized[i], +1.0);
  }
  const double n = static_cast<double>(standardized.size());
  double lp = std::lgamma(concentration) - std::lgamma(concentration + n);
  for (const auto& [k, s] : stats) {
    lp += std::log(concentration) + std::lgamma(static_cast<double>(s.n));
    lp += log_marginal(prior, s);
  }
  return lp;
}

MixtureModel dpgmm_fit(const std::vector<std::vector<double>>& vectors, const DPGMMConfig& config) {
  if (vectors.size() < 10) throw std::invalid_argument("DPGMM needs at least 10 vectors");
  const std::size_t dim = vectors.front().size();
  if (dim == 0) throw std::invalid_argument("empty feature vectors");
  check_vectors(vectors, dim);
  config.validate(dim);

  MixtureModel m;
  m.dim = dim;
  m.config = config;
  m.data = vectors;
  m.shift.assign(dim, 0.0);
  m.scale.assign(dim, 0.0);
  const double n = static_cast<double>(vectors.size());
  for (const auto& v : vectors)
    for (std::size_t j = 0; j < dim; ++j) m.shift[j] += v[j] / n;
  for (const auto& v : vectors)
    for (std::size_t j = 0; j < dim; ++j) m.scale[j] += (v[j] - m.shift[j]) * (v[j] - m.shift[j]) / n;
  for (std::size_t j = 0; j < dim; ++j) {
    m.scale[j] = std::sqrt(m.scale[j]);
    if (!(m.scale[j] > 1e-12 * std::max(1.0, std::abs(m.shift[j]))))
      m.scale[j] = std::abs(m.shift[j]) > 0.0 ? std::abs(m.shift[j]) : 1.0;
  }

  m.prior.mean.assign(dim, 0.0);
  if (!config.prior_mean.empty())
    for (std::size_t j = 0; j < dim; ++j) m.prior.mean[j] = (config.prior_mean[j] - m.shift[j]) / m.scale[j];
  m.prior.kappa = config.prior_precision_scale;
  m.prior.dof = config.dof_for(dim);
  m.prior.scale = SquareMatrix::identity(dim, config.prior_scale);

  Rng rng(config.seed);
  const auto z = standardize(m, m.data);
  auto g = run_gibbs(z, {}, m.prior, config.concentration, config.n_sweeps, config.burn_in, rng);
  m.assignments = std::move(g.mode);
  m.components_per_sweep = std::move(g.k_trace);
  m.log_posterior_per_sweep = std::move(g.lp_trace);
  m.mode_sweep = g.mode_sweep;
  m.mode_log_posterior = g.mode_lp;
  rebuild_components(m);
  return m;
}

MixtureModel dpgmm_update(const MixtureModel& model, const std::vector<std::vector<double>>& new_vectors,
                          const DPGMMConfig& config) {
  if (new_vectors.empty()) return model;
  check_vectors(new_vectors, model.dim);
  config.validate(model.dim);

  MixtureModel m = model;
  m.config.concentration = config.concentration;
  m.config.n_sweeps = config.n_sweeps;
  m.config.burn_in = config.burn_in;
  m.config.seed = config.seed;
  m.data.insert(m.data.end(), new_vectors.begin(), new_vectors.end());

  Rng rng(config.seed);
  const auto z = standardize(m, m.data);
  auto g = run_gibbs(z, model.assignments, m.prior, config.concentration, config.n_sweeps,
                     config.burn_in, rng);
  m.assignments = std::move(g.mode);
  m.components_per_sweep = std::move(g.k_trace);
  m.log_posterior_per_sweep = std::move(g.lp_trace);
  m.mode_sweep = g.mode_sweep;
  m.mode_log_posterior = g.mode_lp;
  rebuild_components(m);
  return m;
}

PredictiveScores predictive_scores(const MixtureModel& model, const std::vector<double>& x) {
  if (x.size() != model.dim)
    throw std::invalid_argument("vector dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(model.dim));
  const Vec zx = standardize(model, {x}).front();
  double jac = 0.0;
  for (double s : model.scale) jac -= std::log(s);
  const double total = static_cast<double>(model.data.size()) + model.config.concentration;

  PredictiveScores out;
  for (const auto& s : component_stats(model)) {
    const auto pred = make_predictive(posterior(model.prior, s));
    out.log_component.push_back(std::log(static_cast<double>(s.n) / total) + pred.log_density(zx) + jac);
  }
  const auto prior_pred = make_predictive(posterior(model.prior, Suff(model.dim)));
  out.log_new = std::log(model.config.concentration / total) + prior_pred.log_density(zx) + jac;
  return out;
}

void save_mixture(const MixtureModel& m, std::ostream& out) {
  using nlohmann::json;
  json j;
  j["format"] = "cogniscope-dpgmm";
  j["version"] = 1;
  j["dim"] = m.dim;
  j["config"] = {{"concentration", m.config.concentration},
                 {"prior_mean", m.config.prior_mean},
                 {"prior_scale", m.config.prior_scale},
                 {"prior_dof", m.config.prior_dof},
                 {"prior_precision_scale", m.config.prior_precision_scale},
                 {"n_sweeps", m.config.n_sweeps},
                 {"burn_in", m.config.burn_in},
                 {"seed", m.config.seed}};
  j["standardization"] = {{"shift", m.shift}, {"scale", m.scale}};
  j["mode"] = {{"sweep", m.mode_sweep}, {"log_posterior", m.mode_log_posterior}};
  json comps = json::array();
  for (const auto& c : m.components) {
    json chol = json::array();
    for (std::size_t r = 0; r < m.dim; ++r) {
      json row = json::array();
      for (std::size_t col = 0; col <= r; ++col) row.push_back(c.cholesky(r, col));
      chol.push_back(row);
    }
    comps.push_back({{"weight", c.weight}, {"count", c.count}, {"mean", c.mean}, {"cov_cholesky", chol}});
  }
  j["components"] = comps;
  j["components_per_sweep"] = m.components_per_sweep;
  j["data"] = m.data;
  j["assignments"] = m.assignments;
  out << j.dump(1) << '\n';
}

MixtureModel load_mixture(std::istream& in) {
  using nlohmann::json;
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("mixture file: ") + e.what());
  }
  if (j.value("format", "") != "cogniscope-dpgmm" || j.value("version", 0) != 1)
    throw std::runtime_error("mixture file: not a cogniscope-dpgmm v1 model");
  MixtureModel m;
  m.dim = j.at("dim").get<std::size_t>();
  const auto& c = j.at("config");
  m.config.concentration = c.at("concentration").get<double>();
  m.config.prior_mean = c.at("prior_mean").get<Vec>();
  m.config.prior_scale = c.at("prior_scale").get<double>();
  m.config.prior_dof = c.at("prior_dof").get<double>();
  m.config.prior_precision_scale = c.at("prior_precision_scale").get<double>();
  m.config.n_sweeps = c.at("n_sweeps").get<std::size_t>();
  m.config.burn_in = c.at("burn_in").get<std::size_t>();
  m.config.seed = c.at("seed").get<std::uint64_t>();
  m.shift = j.at("standardization").at("shift").get<Vec>();
  m.scale = j.at("standardization").at("scale").get<Vec>();
  m.mode_sweep = j.at("mode").at("sweep").get<std::size_t>();
  m.mode_log_posterior = j.at("mode").at("log_posterior").get<double>();
  m.components_per_sweep = j.at("components_per_sweep").get<std::vector<std::size_t>>();
  m.data = j.at("data").get<std::vector<Vec>>();
  m.assignments = j.at("assignments").get<std::vector<std::size_t>>();
  if (m.data.size() != m.assignments.size() || m.shift.size() != m.dim || m.scale.size() != m.dim)
    throw std::runtime_error("mixture file: inconsistent sizes");
  check_vectors(m.data, m.dim);

  m.prior.mean.assign(m.dim, 0.0);
  if (!m.config.prior_mean.empty())
    for (std::size_t k = 0; k < m.dim; ++k)
      m.prior.mean[k] = (m.config.prior_mean[k] - m.shift[k]) / m.scale[k];
  m.prior.kappa = m.config.prior_precision_scale;
  m.prior.dof = m.config.dof_for(m.dim);
  m.prior.scale = SquareMatrix::identity(m.dim, m.config.prior_scale);
  rebuild_components(m);
  return m;
}

}  // namespace cogniscope
