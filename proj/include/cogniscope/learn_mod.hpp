#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "cogniscope/dpgmm.hpp"
#include "cogniscope/features.hpp"

namespace cogniscope {

/// Candidate modulations with their unit-power, noiseless cumulant signatures.
struct ModulationDictionary {
  struct Entry {
    ModulationType modulation = ModulationType::BPSK;
    CumulantVector unit_signature;
    bool active = true;
  };
  std::vector<Entry> entries;

  /// BPSK, QPSK, PSK8 and QAM16.
  static ModulationDictionary standard();
  std::size_t active_count() const;
};

struct PatternAssignment {
  std::optional<std::size_t> component_id;  // absent for an unknown pattern
  ModulationType modulation = ModulationType::NOISE_ONLY;
  double estimated_power = 0.0;
  double residual = 0.0;
  bool unknown = false;
};

struct NoiseIdentification {
  std::optional<std::size_t> component_id;  // absent: no idle channel was observed
  double noise_variance = 0.0;

  bool idle_observed() const { return component_id.has_value(); }
};

/// Fraction of data a component needs to count as a pattern.
inline constexpr double kDominantWeight = 0.025;

/// Picks the dominant component with the smallest |(C40, C42)| if that norm is
/// at most noise_gate * C21^2; its C21 mean is the noise variance.
NoiseIdentification identify_noise_component(const MixtureModel& model, double noise_gate = 0.1,
                                             double dominance = kDominantWeight);

struct PatternMatch {
  std::vector<PatternAssignment> assignments;  // one per dominant non-noise component
  ModulationDictionary dictionary;             // pruned: unmatched entries inactive
};

/// Power estimate P = C21 - noise_variance (clamped to a tiny positive value);
/// residual = |(C40, C42) - P^2 (c40, c42)_unit|; the entry with least residual wins.
PatternMatch match_patterns(const MixtureModel& model, const ModulationDictionary& dictionary,
                            double noise_variance,
                            std::optional<std::size_t> noise_component = std::nullopt,
                            double dominance = kDominantWeight);

/// Maximal posterior-predictive component; an unknown pattern when the
/// new-component mass wins or the winner carries no matched pattern.
/// The noise component maps to NOISE_ONLY.
PatternAssignment classify_vector(const MixtureModel& model,
                                  const std::vector<PatternAssignment>& assignments,
                                  const CumulantVector& v,
                                  std::optional<std::size_t> noise_component = std::nullopt);

std::vector<std::vector<double>> to_points(const std::vector<CumulantVector>& vectors);

MixtureModel fit_patterns(const std::vector<CumulantVector>& vectors, const DPGMMConfig& config);

MixtureModel update_posterior(const MixtureModel& model, const std::vector<CumulantVector>& new_vectors,
                              const DPGMMConfig& config);

}  // namespace cogniscope
