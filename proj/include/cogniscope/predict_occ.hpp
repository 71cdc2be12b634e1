#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "cogniscope/rng.hpp"
#include "cogniscope/signal_model.hpp"

namespace cogniscope {

/// counts[from][to], indexed by ChannelState.
using TransitionCounts = std::array<std::array<std::size_t, 2>, 2>;

/// Smoothed ML: p(a -> b) = (count(a -> b) + s) / (count(a -> .) + 2 s).
/// A state never left with s == 0 gets transition probability 0.
TwoStateMarkov estimate_chain(const TransitionCounts& counts, double smoothing);

struct FittedChannelModel {
  struct Channel {
    int channel_id = 0;
    TwoStateMarkov chain;
    TransitionCounts counts{};
    std::size_t observations = 0;
  };
  std::vector<Channel> channels;  // ascending channel id
  double smoothing = 1.0;

  /// Throws std::invalid_argument for an unknown channel id.
  const Channel& at(int channel_id) const;
};

/// Throws std::invalid_argument for traces shorter than 2 or a negative smoothing.
FittedChannelModel fit_history(const std::vector<ChannelOccupancyTrace>& traces, double smoothing = 1.0);

struct VacancyForecast {
  std::map<int, double> vacancy_probability;
  std::vector<int> ranking;  // descending probability, ties by ascending id
};

/// P(vacant next) = 1 - p_occupy when vacant now, p_vacate when occupied now.
VacancyForecast predict_next(const FittedChannelModel& model,
                             const std::vector<std::pair<int, ChannelState>>& current_states);

/// P(VACANT after `steps` transitions from `from`).
double vacancy_after(const TwoStateMarkov& chain, ChannelState from, std::size_t steps);

/// Sensed observations per channel, (slot, sensed state) in slot order.
class HistoryDatabase {
 public:
  explicit HistoryDatabase(std::size_t channels = 0) : records_(channels), counts_(channels) {}

  void record(int channel, std::size_t slot, ChannelState state);
  std::size_t channel_count() const { return records_.size(); }
  std::size_t size() const;
  const std::vector<std::pair<std::size_t, ChannelState>>& records(int channel) const;
  /// Transitions between consecutive sensed slots t, t+1 of the same channel.
  const TransitionCounts& counts(int channel) const { return counts_.at(channel); }

  /// Refit from stored records only.
  FittedChannelModel refit(double smoothing) const;

  /// CSV `channel,slot,sensed_state` with sensed_state in {VACANT, OCCUPIED}.
  void write_csv(std::ostream& out) const;
  static HistoryDatabase read_csv(std::istream& in);

 private:
  std::vector<std::vector<std::pair<std::size_t, ChannelState>>> records_;
  std::vector<TransitionCounts> counts_;
};

enum class SensingMode {
  bernoulli,        // flip the true state with the channel's error probability
  energy_detector,  // synthesize a frame and run the ML energy detector
};

struct PolicyConfig {
  std::size_t budget = 5;
  std::size_t horizon = 2000;
  double capacity = 1.0;
  double smoothing = 1.0;
  /// Weight of the sqrt(ln(t + 1) / (1 + recorded transitions)) ranking bonus; 0 ranks by forecast alone.
  double exploration = 0.5;
  /// One entry per channel, or a single entry applied to all.
  std::vector<double> sensing_error{0.05};
  SensingMode sensing = SensingMode::bernoulli;
  double detector_snr_db = 0.0;      // energy_detector only
  std::size_t detector_samples = 64; // energy_detector only
};

struct ThroughputReport {
  double mean_throughput = 0.0;
  double mean_prediction_error = 0.0;
  std::size_t slots = 0;
  std::size_t budget = 0;
  double baseline_mean_throughput = 0.0;
};

struct PolicyRun {
  ThroughputReport report;
  HistoryDatabase database;
  FittedChannelModel final_model;
  std::vector<ChannelOccupancyTrace> truth;
};

/// Closed loop per slot: forecast from the fitted model, sense the top-`budget`
/// channels, transmit on those sensed vacant (capacity earned only when truly
/// vacant), record the sensed states and refit. The random-selection baseline
/// runs on the same occupancy realization.
PolicyRun run_policy(const std::vector<TwoStateMarkov>& models, const PolicyConfig& config, Rng& rng);

/// k * capacity * vacancy * (1 - miss), miss being the probability that a truly
/// vacant selected channel is not used. A cross-check, not ground truth.
double analytic_throughput(double vacancy_prob, double mean_error, std::size_t budget, double capacity);

}  // namespace cogniscope
