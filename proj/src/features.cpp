#include "cogniscope/features.hpp"

#include <cmath>
#include <stdexcept>

namespace cogniscope {

double EnergyFeatureVector::mean_energy() const {
  if (energies.empty()) return 0.0;
  double s = 0.0;
  for (double e : energies) s += e;
  return s / static_cast<double>(energies.size());
}

EnergyFeatureVector energy_features(const IQFrame& frame) {
  const auto& cfg = frame.slot_config;
  if (frame.samples.size() != cfg.frame_length())
    throw std::invalid_argument("frame length does not match its slot geometry");
  EnergyFeatureVector v;
  v.energies.reserve(cfg.slots_per_frame);
  for (std::size_t k = 0; k < cfg.slots_per_frame; ++k) {
    double acc = 0.0;
    for (const auto& x : frame.slot(k)) acc += std::norm(x);
    v.energies.push_back(acc / static_cast<double>(cfg.samples_per_slot));
  }
  v.truth_label = frame.truth;
  return v;
}

CumulantVector estimate_cumulants(std::span<const cplx> samples) {
  if (samples.size() < 4) throw std::invalid_argument("cumulant estimation needs >= 4 samples");
  cplx m20{}, m40{};
  double m21 = 0.0, m42 = 0.0;
  for (const auto& x : samples) {
    const cplx x2 = x * x;
    const double p = std::norm(x);
    m20 += x2;
    m21 += p;
    m40 += x2 * x2;
    m42 += p * p;
  }
  const double n = static_cast<double>(samples.size());
  m20 /= n;
  m21 /= n;
  m40 /= n;
  m42 /= n;

  const cplx c40 = m40 - 3.0 * m20 * m20;
  CumulantVector out;
  out.values = {m21, c40.real(), m42 - std::norm(m20) - 2.0 * m21 * m21};
  out.sample_count = samples.size();
  out.c40_imag = c40.imag();
  out.c40_imag_flag = std::abs(c40.imag()) > 0.1 * std::abs(c40.real());
  return out;
}

CumulantVector theoretical_cumulants(const Constellation& constellation, double power,
                                     double noise_variance) {
  if (constellation.points.empty()) throw std::invalid_argument("empty constellation");
  cplx m20{}, m40{};
  double m21 = 0.0, m42 = 0.0;
  for (const auto& x : constellation.points) {
    m20 += x * x;
    m21 += std::norm(x);
    m40 += x * x * x * x;
    m42 += std::norm(x) * std::norm(x);
  }
  const double n = static_cast<double>(constellation.points.size());
  m20 /= n;
  m21 /= n;
  m40 /= n;
  m42 /= n;
  const double c40 = (m40 - 3.0 * m20 * m20).real();
  const double c42 = m42 - std::norm(m20) - 2.0 * m21 * m21;

  CumulantVector out;
  out.values = {power * m21 + noise_variance, power * power * c40, power * power * c42};
  out.sample_count = 0;
  return out;
}

}  // namespace cogniscope
