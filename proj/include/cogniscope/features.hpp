#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "cogniscope/signal_model.hpp"

namespace cogniscope {

/// Per-slot average |x|^2 over a multi-slot sensing frame.
struct EnergyFeatureVector {
  std::vector<double> energies;
  std::optional<TransmitPattern> truth_label;

  double mean_energy() const;
};

EnergyFeatureVector energy_features(const IQFrame& frame);

/// [C21, Re C40, C42], with C21 first so the vector keeps the energy information.
struct CumulantVector {
  static constexpr std::size_t kDim = 3;

  std::array<double, kDim> values{};
  std::size_t sample_count = 0;
  /// Imaginary part of the C40 estimate; flagged when |Im| > 10% of |Re|.
  double c40_imag = 0.0;
  bool c40_imag_flag = false;
  std::optional<TransmitPattern> truth_label;

  double c21() const { return values[0]; }
  double c40() const { return values[1]; }
  double c42() const { return values[2]; }
};

/// Plug-in moment estimates: Mpq = mean(x^(p-q) conj(x)^q);
/// C21 = M21, C40 = M40 - 3 M20^2, C42 = M42 - |M20|^2 - 2 M21^2.
/// Throws std::invalid_argument for fewer than 4 samples.
CumulantVector estimate_cumulants(std::span<const cplx> samples);

/// Population cumulants of sqrt(power) * constellation + CN(0, noise_variance).
/// Gaussian noise only reaches C21.
CumulantVector theoretical_cumulants(const Constellation& constellation, double power,
                                     double noise_variance);

}  // namespace cogniscope
