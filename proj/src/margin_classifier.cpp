#include "cogniscope/margin_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

namespace cogniscope {

namespace {

constexpr double kTau = 1e-12;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct SolveResult {
  std::vector<double> alpha;
  double rho = 0.0;
  double gap = 0.0;
  std::size_t iterations = 0;
};

// Dual: min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0, Q_ij = y_i y_j K_ij.
SolveResult smo_solve(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                      const Kernel& kernel, const SvmConfig& cfg) {
  const std::size_t n = x.size();
  std::vector<double> gram(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) gram[i * n + j] = gram[j * n + i] = kernel(x[i], x[j]);
  auto q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * gram[i * n + j]; };

  const double c = cfg.c;
  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto upper = [&](std::size_t t) { return alpha[t] >= c; };
  auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

  SolveResult res;
  for (;;) {
    double gmax = -kInf, gmax2 = -kInf;
    std::size_t i = n, j = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (y[t] > 0) {
        if (!upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (!lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    double best_obj = kInf;
    if (i < n) {
      for (std::size_t t = 0; t < n; ++t) {
        const double quad = gram[i * n + i] + gram[t * n + t] - 2.0 * gram[i * n + t];
        if (y[t] > 0) {
          if (lower(t)) continue;
          const double diff = gmax + grad[t];
          gmax2 = std::max(gmax2, grad[t]);
          if (diff > 0) {
            const double obj = -diff * diff / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) { best_obj = obj; j = t; }
          }
        } else {
          if (upper(t)) continue;
          const double diff = gmax - grad[t];
          gmax2 = std::max(gmax2, -grad[t]);
          if (diff > 0) {
            const double obj = -diff * diff / (quad > 0 ? quad : kTau);
            if (obj <= best_obj) { best_obj = obj; j = t; }
          }
        }
      }
    }
    res.gap = (i < n) ? gmax + gmax2 : 0.0;
    if (i == n || j == n || res.gap < cfg.tolerance) break;
    if (res.iterations >= cfg.max_iterations) throw TrainingFailure(res.gap, res.iterations);
    ++res.iterations;

    const double ai_old = alpha[i], aj_old = alpha[j];
    if (y[i] != y[j]) {
      double quad = gram[i * n + i] + gram[j * n + j] + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0) {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = -diff; }
      }
      if (diff > 0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = gram[i * n + i] + gram[j * n + j] - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0) { alpha[j] = 0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0) { alpha[i] = 0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - ai_old, daj = alpha[j] - aj_old;
    for (std::size_t t = 0; t < n; ++t) grad[t] += q(i, t) * dai + q(j, t) * daj;
  }

  double ub = kInf, lb = -kInf, sum_free = 0.0;
  std::size_t free = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (upper(t)) {
      if (y[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (y[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++free;
      sum_free += yg;
    }
  }
  res.rho = free > 0 ? sum_free / static_cast<double>(free) : 0.5 * (ub + lb);
  res.alpha = std::move(alpha);
  return res;
}

}  // namespace

TrainingFailure::TrainingFailure(double gap, std::size_t iterations)
    : std::runtime_error("SMO did not converge: residual KKT gap " + std::to_string(gap) +
                         " after " + std::to_string(iterations) + " iterations"),
      gap_(gap),
      iterations_(iterations) {}

double Kernel::operator()(const std::vector<double>& a, const std::vector<double>& b) const {
  if (kind == Kind::linear) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

double BinaryMachine::decision(const std::vector<double>& x, const Kernel& kernel) const {
  double s = bias;
  for (std::size_t i = 0; i < support_vectors.size(); ++i)
    s += coefficients[i] * kernel(support_vectors[i], x);
  return s;
}

std::vector<double> MarginClassifier::linear_weights(std::size_t machine) const {
  if (kernel.kind != Kernel::Kind::linear)
    throw std::logic_error("primal weights exist only for the linear kernel");
  const auto& m = machines.at(machine);
  std::vector<double> w(dim, 0.0);
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
    for (std::size_t d = 0; d < dim; ++d) w[d] += m.coefficients[i] * m.support_vectors[i][d];
  return w;
}

double MarginClassifier::linear_margin(std::size_t machine) const {
  double norm2 = 0.0;
  for (double w : linear_weights(machine)) norm2 += w * w;
  return norm2 > 0.0 ? 1.0 / std::sqrt(norm2) : kInf;
}

std::size_t MarginClassifier::support_vector_count() const {
  std::size_t n = 0;
  for (const auto& m : machines) n += m.support_vectors.size();
  return n;
}

MarginClassifier train_margin_classifier(const std::vector<LabeledVector>& data,
                                         Kernel::Kind kernel, const SvmConfig& config) {
  if (data.empty()) throw std::invalid_argument("no training data");
  if (!(config.c > 0.0) || !(config.tolerance > 0.0))
    throw std::invalid_argument("SVM C and tolerance must be positive");
  const std::size_t dim = data.front().features.size();
  if (dim == 0) throw std::invalid_argument("empty feature vectors");
  std::map<int, std::size_t> per_class;
  for (const auto& d : data) {
    if (d.features.size() != dim) throw std::invalid_argument("ragged feature vectors");
    ++per_class[d.label];
  }
  if (per_class.size() < 2) throw std::invalid_argument("training needs at least two classes");
  for (const auto& [label, count] : per_class)
    if (count < 2)
      throw std::invalid_argument("class " + std::to_string(label) + " has fewer than 2 examples");

  MarginClassifier clf;
  clf.dim = dim;
  clf.kernel.kind = kernel;
  if (config.normalize) {
    double s = 0.0;
    for (const auto& d : data)
      for (double v : d.features) s += v;
    s /= static_cast<double>(data.size() * dim);
    clf.normalizer = s > 0.0 ? s : 1.0;
  }
  std::vector<std::vector<double>> x;
  x.reserve(data.size());
  for (const auto& d : data) {
    auto v = d.features;
    for (double& e : v) e /= clf.normalizer;
    x.push_back(std::move(v));
  }
  if (kernel == Kernel::Kind::gaussian) {
    if (config.gamma) {
      clf.kernel.gamma = *config.gamma;
    } else {
      double mean = 0.0, m2 = 0.0;
      const double cnt = static_cast<double>(x.size() * dim);
      for (const auto& v : x)
        for (double e : v) mean += e / cnt;
      for (const auto& v : x)
        for (double e : v) m2 += (e - mean) * (e - mean) / cnt;
      clf.kernel.gamma = m2 > 0.0 ? 1.0 / (static_cast<double>(dim) * m2) : 1.0;
    }
  }
  for (const auto& [label, count] : per_class) clf.classes.push_back(label);

  for (std::size_t a = 0; a < clf.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < clf.classes.size(); ++b) {
      std::vector<std::vector<double>> px;
      std::vector<double> py;
      for (std::size_t i = 0; i < data.size(); ++i) {
        if (data[i].label == clf.classes[a]) {
          px.push_back(x[i]);
          py.push_back(+1.0);
        } else if (data[i].label == clf.classes[b]) {
          px.push_back(x[i]);
          py.push_back(-1.0);
        }
      }
      const auto sol = smo_solve(px, py, clf.kernel, config);
      BinaryMachine m;
      m.positive_class = clf.classes[a];
      m.negative_class = clf.classes[b];
      m.bias = -sol.rho;
      m.final_gap = sol.gap;
      m.iterations = sol.iterations;
      for (std::size_t i = 0; i < px.size(); ++i) {
        if (sol.alpha[i] > 0.0) {
          m.support_vectors.push_back(px[i]);
          m.coefficients.push_back(sol.alpha[i] * py[i]);
          if (sol.alpha[i] >= config.c) ++m.bounded_support_vectors;
        }
      }
      clf.machines.push_back(std::move(m));
    }
  }
  return clf;
}

int classify_features(const MarginClassifier& clf, const std::vector<double>& features) {
  if (features.size() != clf.dim)
    throw std::invalid_argument("feature dimension " + std::to_string(features.size()) +
                                " does not match classifier dimension " + std::to_string(clf.dim));
  std::vector<double> x = features;
  for (double& e : x) e /= clf.normalizer;
  std::map<int, int> votes;
  for (int c : clf.classes) votes[c] = 0;
  for (const auto& m : clf.machines)
    ++votes[m.decision(x, clf.kernel) >= 0.0 ? m.positive_class : m.negative_class];
  int best = clf.classes.front();
  int best_votes = -1;
  for (const auto& [c, v] : votes) {  // ascending class id
    if (v > best_votes) {
      best_votes = v;
      best = c;
    }
  }
  return best;
}

void save_classifier(const MarginClassifier& clf, std::ostream& out) {
  out << std::setprecision(17);
  out << "cogniscope-margin-classifier 1\n";
  out << "kernel " << (clf.kernel.kind == Kernel::Kind::linear ? "linear" : "gaussian") << '\n';
  out << "gamma " << clf.kernel.gamma << '\n';
  out << "dim " << clf.dim << '\n';
  out << "normalizer " << clf.normalizer << '\n';
  out << "classes " << clf.classes.size();
  for (int c : clf.classes) out << ' ' << c;
  out << '\n';
  out << "machines " << clf.machines.size() << '\n';
  for (const auto& m : clf.machines) {
    out << "machine " << m.positive_class << ' ' << m.negative_class << '\n';
    out << "bias " << m.bias << '\n';
    out << "support_vectors " << m.support_vectors.size() << '\n';
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
      out << m.coefficients[i];
      for (double v : m.support_vectors[i]) out << ' ' << v;
      out << '\n';
    }
  }
}

MarginClassifier load_classifier(std::istream& in) {
  auto expect = [&](const std::string& key) {
    std::string got;
    if (!(in >> got) || got != key)
      throw std::runtime_error("classifier file: expected '" + key + "', got '" + got + "'");
  };
  MarginClassifier clf;
  int version = 0;
  expect("cogniscope-margin-classifier");
  in >> version;
  if (version != 1) throw std::runtime_error("classifier file: unsupported version");
  std::string kind;
  expect("kernel");
  in >> kind;
  if (kind == "linear") clf.kernel.kind = Kernel::Kind::linear;
  else if (kind == "gaussian") clf.kernel.kind = Kernel::Kind::gaussian;
  else throw std::runtime_error("classifier file: unknown kernel '" + kind + "'");
  expect("gamma");
  in >> clf.kernel.gamma;
  expect("dim");
  in >> clf.dim;
  expect("normalizer");
  in >> clf.normalizer;
  std::size_t n = 0;
  expect("classes");
  in >> n;
  clf.classes.resize(n);
  for (auto& c : clf.classes) in >> c;
  expect("machines");
  in >> n;
  clf.machines.resize(n);
  for (auto& m : clf.machines) {
    expect("machine");
    in >> m.positive_class >> m.negative_class;
    expect("bias");
    in >> m.bias;
    std::size_t svs = 0;
    expect("support_vectors");
    in >> svs;
    m.support_vectors.assign(svs, std::vector<double>(clf.dim));
    m.coefficients.resize(svs);
    for (std::size_t i = 0; i < svs; ++i) {
      in >> m.coefficients[i];
      for (auto& v : m.support_vectors[i]) in >> v;
    }
  }
  if (!in) throw std::runtime_error("classifier file: truncated");
  return clf;
}

}  // namespace cogniscope
