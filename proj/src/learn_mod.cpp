#include "cogniscope/learn_mod.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cogniscope {

ModulationDictionary ModulationDictionary::standard() {
  ModulationDictionary d;
  for (auto tag : {ModulationType::BPSK, ModulationType::QPSK, ModulationType::PSK8,
                   ModulationType::QAM16})
    d.entries.push_back({tag, theoretical_cumulants(make_constellation(tag), 1.0, 0.0), true});
  return d;
}

std::size_t ModulationDictionary::active_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.active;
  return n;
}

NoiseIdentification identify_noise_component(const MixtureModel& model, double noise_gate,
                                             double dominance) {
  if (model.components.empty()) throw std::invalid_argument("empty mixture model");
  if (model.dim != CumulantVector::kDim)
    throw std::invalid_argument("noise identification expects [C21, C40, C42] components");
  NoiseIdentification out;
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_k = 0;
  for (std::size_t k : model.dominant(dominance)) {
    const auto& mu = model.components[k].mean;
    const double norm = std::hypot(mu[1], mu[2]);
    if (norm < best) {
      best = norm;
      best_k = k;
    }
  }
  if (!std::isfinite(best)) return out;
  const double c21 = model.components[best_k].mean[0];
  if (c21 > 0.0 && best <= noise_gate * c21 * c21) {
    out.component_id = best_k;
    out.noise_variance = c21;
  }
  return out;
}

PatternMatch match_patterns(const MixtureModel& model, const ModulationDictionary& dictionary,
                            double noise_variance, std::optional<std::size_t> noise_component,
                            double dominance) {
  if (model.dim != CumulantVector::kDim)
    throw std::invalid_argument("pattern matching expects [C21, C40, C42] components");
  if (dictionary.entries.empty()) throw std::invalid_argument("empty modulation dictionary");
  PatternMatch out;
  out.dictionary = dictionary;
  std::vector<bool> used(dictionary.entries.size(), false);
  for (std::size_t k : model.dominant(dominance)) {
    if (noise_component && *noise_component == k) continue;
    const auto& mu = model.components[k].mean;
    PatternAssignment a;
    a.component_id = k;
    a.estimated_power = std::max(mu[0] - noise_variance, 1e-12);
    const double p2 = a.estimated_power * a.estimated_power;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_e = 0;
    for (std::size_t e = 0; e < dictionary.entries.size(); ++e) {
      const auto& sig = dictionary.entries[e].unit_signature;
      const double r = std::hypot(mu[1] - p2 * sig.c40(), mu[2] - p2 * sig.c42());
      if (r < best) {
        best = r;
        best_e = e;
      }
    }
    a.modulation = dictionary.entries[best_e].modulation;
    a.residual = best;
    used[best_e] = true;
    out.assignments.push_back(a);
  }
  for (std::size_t e = 0; e < used.size(); ++e) out.dictionary.entries[e].active = used[e];
  return out;
}

PatternAssignment classify_vector(const MixtureModel& model,
                                  const std::vector<PatternAssignment>& assignments,
                                  const CumulantVector& v, std::optional<std::size_t> noise_component) {
  const std::vector<double> x(v.values.begin(), v.values.end());
  const auto scores = predictive_scores(model, x);
  double best = scores.log_new;
  std::optional<std::size_t> winner;
  for (std::size_t k = 0; k < scores.log_component.size(); ++k) {
    if (scores.log_component[k] > best) {
      best = scores.log_component[k];
      winner = k;
    }
  }
  PatternAssignment out;
  out.unknown = true;
  if (!winner) return out;
  if (noise_component && *winner == *noise_component) {
    out.component_id = winner;
    out.unknown = false;
    return out;  // NOISE_ONLY, power 0
  }
  for (const auto& a : assignments) {
    if (a.component_id == winner) return a;
  }
  out.component_id = winner;  // micro-component without a pattern
  return out;
}

std::vector<std::vector<double>> to_points(const std::vector<CumulantVector>& vectors) {
  std::vector<std::vector<double>> pts;
  pts.reserve(vectors.size());
  for (const auto& v : vectors) pts.emplace_back(v.values.begin(), v.values.end());
  return pts;
}

MixtureModel fit_patterns(const std::vector<CumulantVector>& vectors, const DPGMMConfig& config) {
  return dpgmm_fit(to_points(vectors), config);
}

MixtureModel update_posterior(const MixtureModel& model, const std::vector<CumulantVector>& new_vectors,
                              const DPGMMConfig& config) {
  return dpgmm_update(model, to_points(new_vectors), config);
}

}  // namespace cogniscope
