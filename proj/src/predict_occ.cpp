#include "cogniscope/predict_occ.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "cogniscope/detect.hpp"
#include "cogniscope/features.hpp"

namespace cogniscope {

namespace {

constexpr std::size_t V = static_cast<std::size_t>(ChannelState::VACANT);
constexpr std::size_t O = static_cast<std::size_t>(ChannelState::OCCUPIED);

double smoothed(std::size_t hits, std::size_t total, double s) {
  const double denom = static_cast<double>(total) + 2.0 * s;
  return denom > 0.0 ? (static_cast<double>(hits) + s) / denom : 0.0;
}

std::vector<int> rank_desc(const std::map<int, double>& p) {
  std::vector<int> ids;
  for (const auto& [id, v] : p) ids.push_back(id);  // ascending id
  std::stable_sort(ids.begin(), ids.end(), [&](int a, int b) { return p.at(a) > p.at(b); });
  return ids;
}

}  // namespace

TwoStateMarkov estimate_chain(const TransitionCounts& c, double smoothing) {
  if (!(smoothing >= 0.0)) throw std::invalid_argument("smoothing must be >= 0");
  return {smoothed(c[V][O], c[V][V] + c[V][O], smoothing),
          smoothed(c[O][V], c[O][V] + c[O][O], smoothing)};
}

const FittedChannelModel::Channel& FittedChannelModel::at(int channel_id) const {
  auto it = std::lower_bound(channels.begin(), channels.end(), channel_id,
                             [](const Channel& c, int id) { return c.channel_id < id; });
  if (it == channels.end() || it->channel_id != channel_id)
    throw std::invalid_argument("unknown channel id " + std::to_string(channel_id));
  return *it;
}

FittedChannelModel fit_history(const std::vector<ChannelOccupancyTrace>& traces, double smoothing) {
  if (!(smoothing >= 0.0)) throw std::invalid_argument("smoothing must be >= 0");
  FittedChannelModel m;
  m.smoothing = smoothing;
  for (const auto& t : traces) {
    if (t.states.size() < 2)
      throw std::invalid_argument("channel " + std::to_string(t.channel_id) + " history shorter than 2");
    FittedChannelModel::Channel ch;
    ch.channel_id = t.channel_id;
    for (std::size_t i = 1; i < t.states.size(); ++i)
      ++ch.counts[static_cast<std::size_t>(t.states[i - 1])][static_cast<std::size_t>(t.states[i])];
    ch.observations = t.states.size();
    ch.chain = estimate_chain(ch.counts, smoothing);
    m.channels.push_back(ch);
  }
  std::sort(m.channels.begin(), m.channels.end(),
            [](const auto& a, const auto& b) { return a.channel_id < b.channel_id; });
  for (std::size_t i = 1; i < m.channels.size(); ++i)
    if (m.channels[i].channel_id == m.channels[i - 1].channel_id)
      throw std::invalid_argument("duplicate channel id " + std::to_string(m.channels[i].channel_id));
  return m;
}

VacancyForecast predict_next(const FittedChannelModel& model,
                             const std::vector<std::pair<int, ChannelState>>& current_states) {
  VacancyForecast f;
  for (const auto& [id, state] : current_states) f.vacancy_probability[id] = vacancy_after(model.at(id).chain, state, 1);
  f.ranking = rank_desc(f.vacancy_probability);
  return f;
}

double vacancy_after(const TwoStateMarkov& chain, ChannelState from, std::size_t steps) {
  const double a = chain.p_occupy_given_vacant, b = chain.p_vacate_given_occupied;
  const double start = from == ChannelState::VACANT ? 1.0 : 0.0;
  if (a + b == 0.0) return start;
  const double pi = b / (a + b);
  const double lambda = 1.0 - a - b;
  return std::clamp(pi + (start - pi) * std::pow(lambda, static_cast<double>(steps)), 0.0, 1.0);
}

void HistoryDatabase::record(int channel, std::size_t slot, ChannelState state) {
  auto& r = records_.at(static_cast<std::size_t>(channel));
  if (!r.empty()) {
    if (slot <= r.back().first) throw std::invalid_argument("history slots must increase per channel");
    if (slot == r.back().first + 1)
      ++counts_[static_cast<std::size_t>(channel)][static_cast<std::size_t>(r.back().second)]
               [static_cast<std::size_t>(state)];
  }
  r.emplace_back(slot, state);
}

std::size_t HistoryDatabase::size() const {
  std::size_t n = 0;
  for (const auto& r : records_) n += r.size();
  return n;
}

const std::vector<std::pair<std::size_t, ChannelState>>& HistoryDatabase::records(int channel) const {
  return records_.at(static_cast<std::size_t>(channel));
}

FittedChannelModel HistoryDatabase::refit(double smoothing) const {
  FittedChannelModel m;
  m.smoothing = smoothing;
  for (std::size_t c = 0; c < records_.size(); ++c) {
    FittedChannelModel::Channel ch;
    ch.channel_id = static_cast<int>(c);
    const auto& r = records_[c];
    for (std::size_t i = 1; i < r.size(); ++i)
      if (r[i].first == r[i - 1].first + 1)
        ++ch.counts[static_cast<std::size_t>(r[i - 1].second)][static_cast<std::size_t>(r[i].second)];
    ch.observations = r.size();
    ch.chain = estimate_chain(ch.counts, smoothing);
    m.channels.push_back(ch);
  }
  return m;
}

void HistoryDatabase::write_csv(std::ostream& out) const {
  out << "channel,slot,sensed_state\n";
  for (std::size_t c = 0; c < records_.size(); ++c)
    for (const auto& [slot, state] : records_[c])
      out << c << ',' << slot << ',' << (state == ChannelState::VACANT ? "VACANT" : "OCCUPIED") << '\n';
}

HistoryDatabase HistoryDatabase::read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "channel,slot,sensed_state")
    throw std::runtime_error("history CSV: missing header 'channel,slot,sensed_state'");
  std::vector<std::tuple<int, std::size_t, ChannelState>> rows;
  int max_channel = -1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string ch, slot, state;
    if (!std::getline(ss, ch, ',') || !std::getline(ss, slot, ',') || !std::getline(ss, state))
      throw std::runtime_error("history CSV: malformed line " + std::to_string(line_no));
    ChannelState st;
    if (state == "VACANT") st = ChannelState::VACANT;
    else if (state == "OCCUPIED") st = ChannelState::OCCUPIED;
    else throw std::runtime_error("history CSV: bad state on line " + std::to_string(line_no));
    const int c = std::stoi(ch);
    if (c < 0) throw std::runtime_error("history CSV: negative channel");
    rows.emplace_back(c, static_cast<std::size_t>(std::stoull(slot)), st);
    max_channel = std::max(max_channel, c);
  }
  HistoryDatabase db(static_cast<std::size_t>(max_channel + 1));
  for (const auto& [c, s, st] : rows) db.record(c, s, st);
  return db;
}

namespace {

struct Sensor {
  const PolicyConfig& cfg;
  std::size_t channels;

  double error(std::size_t c) const {
    return cfg.sensing_error.size() == 1 ? cfg.sensing_error[0] : cfg.sensing_error[c];
  }

  ChannelState sense(std::size_t c, ChannelState truth, Rng& rng) const {
    if (cfg.sensing == SensingMode::bernoulli) {
      std::bernoulli_distribution flip(error(c));
      if (!flip(rng)) return truth;
      return truth == ChannelState::VACANT ? ChannelState::OCCUPIED : ChannelState::VACANT;
    }
    const double noise = 1.0;
    const double power = noise * std::pow(10.0, cfg.detector_snr_db / 10.0);
    const auto pattern = truth == ChannelState::VACANT
                             ? TransmitPattern::idle()
                             : TransmitPattern::make(ModulationType::QPSK, power);
    const auto frame = synthesize_frame(pattern, noise, {1, cfg.detector_samples}, rng);
    HypothesisSet hyp{noise, {0.0, power}, std::nullopt};
    const auto level = ml_decide(energy_features(frame).mean_energy(), hyp, cfg.detector_samples);
    return level == 0 ? ChannelState::VACANT : ChannelState::OCCUPIED;
  }
};

}  // namespace

PolicyRun run_policy(const std::vector<TwoStateMarkov>& models, const PolicyConfig& config, Rng& rng) {
  const std::size_t n = models.size();
  if (n == 0) throw std::invalid_argument("no channels");
  if (config.budget < 1 || config.budget > n)
    throw std::invalid_argument("budget must lie in [1, " + std::to_string(n) + "]");
  if (config.horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (config.sensing_error.size() != 1 && config.sensing_error.size() != n)
    throw std::invalid_argument("sensing_error needs one entry or one per channel");
  for (double e : config.sensing_error)
    if (!(e >= 0.0 && e <= 1.0)) throw std::invalid_argument("sensing error must lie in [0, 1]");
  if (!(config.exploration >= 0.0)) throw std::invalid_argument("exploration must be >= 0");
  if (!(config.capacity >= 0.0)) throw std::invalid_argument("capacity must be >= 0");
  if (config.sensing == SensingMode::energy_detector && config.detector_samples < 1)
    throw std::invalid_argument("detector_samples must be >= 1");

  // Independent streams: occupancy, learned-policy sensing, baseline choice and sensing.
  Rng occ_rng(rng());
  Rng sense_rng(rng());
  Rng base_rng(rng());

  PolicyRun run;
  run.truth = simulate_occupancy(models, config.horizon, occ_rng);
  run.database = HistoryDatabase(n);
  const Sensor sensor{config, n};

  std::vector<TwoStateMarkov> fitted(n, estimate_chain({}, config.smoothing));
  std::vector<std::optional<std::pair<std::size_t, ChannelState>>> last(n);

  double earned = 0.0, baseline = 0.0;
  std::size_t wrong = 0;
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);

  for (std::size_t t = 0; t < config.horizon; ++t) {
    std::map<int, double> p;
    for (std::size_t c = 0; c < n; ++c) {
      const auto& ch = fitted[c];
      if (last[c]) {
        p[static_cast<int>(c)] = vacancy_after(ch, last[c]->second, t - last[c]->first);
      } else {
        p[static_cast<int>(c)] = ch.degenerate() ? 1.0 : ch.stationary_vacancy();
      }
    }
    // Rank by forecast plus a confidence bonus that shrinks with the transitions seen.
    std::map<int, double> score = p;
    if (config.exploration > 0.0)
      for (auto& [id, v] : score) {
        const auto& k = run.database.counts(id);
        const double seen = static_cast<double>(k[0][0] + k[0][1] + k[1][0] + k[1][1]);
        v += config.exploration * std::sqrt(std::log(static_cast<double>(t) + 1.0) / (1.0 + seen));
      }
    const auto ranking = rank_desc(score);
    for (std::size_t r = 0; r < config.budget; ++r) {
      const auto c = static_cast<std::size_t>(ranking[r]);
      const ChannelState truth = run.truth[c].states[t];
      const ChannelState predicted = p[ranking[r]] >= 0.5 ? ChannelState::VACANT : ChannelState::OCCUPIED;
      if (predicted != truth) ++wrong;
      const ChannelState sensed = sensor.sense(c, truth, sense_rng);
      if (sensed == ChannelState::VACANT && truth == ChannelState::VACANT) earned += config.capacity;
      run.database.record(static_cast<int>(c), t, sensed);
      last[c] = std::make_pair(t, sensed);
      fitted[c] = estimate_chain(run.database.counts(static_cast<int>(c)), config.smoothing);
    }

    std::shuffle(all.begin(), all.end(), base_rng);
    for (std::size_t r = 0; r < config.budget; ++r) {
      const std::size_t c = all[r];
      const ChannelState truth = run.truth[c].states[t];
      if (sensor.sense(c, truth, base_rng) == ChannelState::VACANT && truth == ChannelState::VACANT)
        baseline += config.capacity;
    }
  }

  const double slots = static_cast<double>(config.horizon);
  run.report.mean_throughput = earned / slots;
  run.report.baseline_mean_throughput = baseline / slots;
  run.report.mean_prediction_error = static_cast<double>(wrong) / (slots * config.budget);
  run.report.slots = config.horizon;
  run.report.budget = config.budget;
  run.final_model = run.database.refit(config.smoothing);
  return run;
}

double analytic_throughput(double vacancy_prob, double mean_error, std::size_t budget, double capacity) {
  if (!(vacancy_prob >= 0.0 && vacancy_prob <= 1.0) || !(mean_error >= 0.0 && mean_error <= 1.0))
    throw std::invalid_argument("probabilities must lie in [0, 1]");
  return static_cast<double>(budget) * capacity * vacancy_prob * (1.0 - mean_error);
}

}  // namespace cogniscope
