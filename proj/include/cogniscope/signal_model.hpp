#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cogniscope/rng.hpp"

namespace cogniscope {

using cplx = std::complex<double>;

enum class ModulationType { NOISE_ONLY, BPSK, QPSK, PSK8, QAM16 };

std::string_view to_string(ModulationType tag);
/// Parses "NOISE_ONLY", "BPSK", "QPSK", "PSK8", "QAM16" (case-insensitive).
ModulationType parse_modulation(std::string_view name);

/// Unit-average-power point set.
struct Constellation {
  ModulationType tag = ModulationType::BPSK;
  std::vector<cplx> points;

  double average_power() const;
};

/// Throws std::invalid_argument for NOISE_ONLY.
Constellation make_constellation(ModulationType tag);

/// A licensed-user transmission: modulation plus received power (linear).
/// power == 0 if and only if modulation == NOISE_ONLY.
struct TransmitPattern {
  ModulationType modulation = ModulationType::NOISE_ONLY;
  double power = 0.0;

  static TransmitPattern idle() { return {}; }
  /// Validating constructor; throws std::invalid_argument on a broken pairing.
  static TransmitPattern make(ModulationType modulation, double power);
  bool is_idle() const { return modulation == ModulationType::NOISE_ONLY; }

  friend bool operator==(const TransmitPattern&, const TransmitPattern&) = default;
};

struct SlotConfig {
  std::size_t slots_per_frame = 1;
  std::size_t samples_per_slot = 1;

  std::size_t frame_length() const { return slots_per_frame * samples_per_slot; }
  void validate() const;
};

struct IQFrame {
  std::vector<cplx> samples;
  SlotConfig slot_config;
  TransmitPattern truth;  // evaluation only
  double noise_variance = 1.0;

  std::span<const cplx> slot(std::size_t k) const;
};

/// samples = sqrt(power) * iid-uniform symbols + CN(0, noise_variance).
/// One symbol per sample; noise variance is split equally between I and Q.
IQFrame synthesize_frame(const TransmitPattern& pattern, double noise_variance,
                         const SlotConfig& slot_config, Rng& rng);

/// Fills `out` with the same model as synthesize_frame without the frame wrapper.
void synthesize_samples(const TransmitPattern& pattern, double noise_variance,
                        std::span<cplx> out, Rng& rng);

enum class ChannelState : std::uint8_t { VACANT = 0, OCCUPIED = 1 };

struct TwoStateMarkov {
  double p_occupy_given_vacant = 0.0;
  double p_vacate_given_occupied = 0.0;

  void validate() const;
  bool degenerate() const { return p_occupy_given_vacant == 0.0 && p_vacate_given_occupied == 0.0; }
  /// Stationary P(VACANT); 1 for the degenerate chain (started vacant, stays vacant).
  double stationary_vacancy() const;

  /// Chain with stationary vacancy `vacancy` and lag-1 autocorrelation `persistence`:
  /// p_occupy = (1 - persistence)(1 - vacancy), p_vacate = (1 - persistence) vacancy.
  static TwoStateMarkov from_stationary(double vacancy, double persistence);
};

struct ChannelOccupancyTrace {
  std::vector<ChannelState> states;
  int channel_id = 0;
  bool degenerate_start = false;  // chain had no stationary law; started VACANT

  double vacancy_fraction() const;
};

ChannelState step_state(const TwoStateMarkov& model, ChannelState current, Rng& rng);

/// One realization of the chain from a fixed start state.
ChannelOccupancyTrace simulate_trace(const TwoStateMarkov& model, std::size_t horizon,
                                     ChannelState start, int channel_id, Rng& rng);

/// One trace per model, channel ids 0..n-1, each started from its stationary law.
std::vector<ChannelOccupancyTrace> simulate_occupancy(std::span<const TwoStateMarkov> models,
                                                      std::size_t horizon, Rng& rng);

}  // namespace cogniscope
