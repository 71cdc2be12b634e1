#include "cogniscope/signal_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace cogniscope {

std::string_view to_string(ModulationType tag) {
  switch (tag) {
    case ModulationType::NOISE_ONLY: return "NOISE_ONLY";
    case ModulationType::BPSK: return "BPSK";
    case ModulationType::QPSK: return "QPSK";
    case ModulationType::PSK8: return "PSK8";
    case ModulationType::QAM16: return "QAM16";
  }
  return "?";
}

ModulationType parse_modulation(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (auto tag : {ModulationType::NOISE_ONLY, ModulationType::BPSK, ModulationType::QPSK,
                   ModulationType::PSK8, ModulationType::QAM16}) {
    if (upper == to_string(tag)) return tag;
  }
  if (upper == "IDLE" || upper == "NOISE") return ModulationType::NOISE_ONLY;
  throw std::invalid_argument("unknown modulation tag '" + std::string(name) + "'");
}

double Constellation::average_power() const {
  double s = 0.0;
  for (const auto& p : points) s += std::norm(p);
  return points.empty() ? 0.0 : s / static_cast<double>(points.size());
}

Constellation make_constellation(ModulationType tag) {
  Constellation c;
  c.tag = tag;
  switch (tag) {
    case ModulationType::NOISE_ONLY:
      throw std::invalid_argument("NOISE_ONLY has no constellation");
    case ModulationType::BPSK:
      c.points = {cplx(1.0, 0.0), cplx(-1.0, 0.0)};
      break;
    case ModulationType::QPSK: {
      const double a = 1.0 / std::sqrt(2.0);
      c.points = {cplx(a, a), cplx(-a, a), cplx(-a, -a), cplx(a, -a)};
      break;
    }
    case ModulationType::PSK8:
      for (int k = 0; k < 8; ++k) c.points.push_back(std::polar(1.0, k * std::numbers::pi / 4.0));
      break;
    case ModulationType::QAM16: {
      const double scale = 1.0 / std::sqrt(10.0);
      for (int i : {-3, -1, 1, 3})
        for (int q : {-3, -1, 1, 3}) c.points.emplace_back(i * scale, q * scale);
      break;
    }
  }
  return c;
}

TransmitPattern TransmitPattern::make(ModulationType modulation, double power) {
  if (!(power >= 0.0) || !std::isfinite(power))
    throw std::invalid_argument("transmit power must be finite and >= 0");
  if ((power == 0.0) != (modulation == ModulationType::NOISE_ONLY))
    throw std::invalid_argument("power == 0 must coincide with NOISE_ONLY");
  return {modulation, power};
}

void SlotConfig::validate() const {
  if (slots_per_frame < 1 || samples_per_slot < 1)
    throw std::invalid_argument("slot geometry must be at least 1x1");
}

std::span<const cplx> IQFrame::slot(std::size_t k) const {
  if (k >= slot_config.slots_per_frame) throw std::out_of_range("slot index");
  return std::span<const cplx>(samples).subspan(k * slot_config.samples_per_slot,
                                                slot_config.samples_per_slot);
}

void synthesize_samples(const TransmitPattern& pattern, double noise_variance,
                        std::span<cplx> out, Rng& rng) {
  if (!(noise_variance > 0.0)) throw std::invalid_argument("noise_variance must be > 0");
  std::normal_distribution<double> gauss(0.0, std::sqrt(noise_variance / 2.0));
  if (pattern.is_idle()) {
    for (auto& s : out) {
      const double re = gauss(rng);
      s = cplx(re, gauss(rng));
    }
    return;
  }
  const Constellation c = make_constellation(pattern.modulation);
  const double amp = std::sqrt(pattern.power);
  std::uniform_int_distribution<std::size_t> pick(0, c.points.size() - 1);
  for (auto& s : out) {
    const cplx sym = amp * c.points[pick(rng)];
    const double re = gauss(rng);
    s = sym + cplx(re, gauss(rng));
  }
}

IQFrame synthesize_frame(const TransmitPattern& pattern, double noise_variance,
                         const SlotConfig& slot_config, Rng& rng) {
  slot_config.validate();
  IQFrame f;
  f.slot_config = slot_config;
  f.truth = TransmitPattern::make(pattern.modulation, pattern.power);
  f.noise_variance = noise_variance;
  f.samples.resize(slot_config.frame_length());
  synthesize_samples(pattern, noise_variance, f.samples, rng);
  return f;
}

void TwoStateMarkov::validate() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(p_occupy_given_vacant) || !ok(p_vacate_given_occupied))
    throw std::invalid_argument("transition probabilities must lie in [0, 1]");
}

double TwoStateMarkov::stationary_vacancy() const {
  if (degenerate()) return 1.0;
  return p_vacate_given_occupied / (p_vacate_given_occupied + p_occupy_given_vacant);
}

TwoStateMarkov TwoStateMarkov::from_stationary(double vacancy, double persistence) {
  if (!(vacancy >= 0.0 && vacancy <= 1.0) || !(persistence >= 0.0 && persistence < 1.0))
    throw std::invalid_argument("vacancy in [0,1] and persistence in [0,1) required");
  return {(1.0 - persistence) * (1.0 - vacancy), (1.0 - persistence) * vacancy};
}

double ChannelOccupancyTrace::vacancy_fraction() const {
  if (states.empty()) return 0.0;
  const auto v = std::count(states.begin(), states.end(), ChannelState::VACANT);
  return static_cast<double>(v) / static_cast<double>(states.size());
}

ChannelState step_state(const TwoStateMarkov& model, ChannelState current, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double r = u(rng);
  if (current == ChannelState::VACANT)
    return r < model.p_occupy_given_vacant ? ChannelState::OCCUPIED : ChannelState::VACANT;
  return r < model.p_vacate_given_occupied ? ChannelState::VACANT : ChannelState::OCCUPIED;
}

ChannelOccupancyTrace simulate_trace(const TwoStateMarkov& model, std::size_t horizon,
                                     ChannelState start, int channel_id, Rng& rng) {
  model.validate();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  ChannelOccupancyTrace t;
  t.channel_id = channel_id;
  t.states.reserve(horizon);
  ChannelState s = start;
  t.states.push_back(s);
  for (std::size_t i = 1; i < horizon; ++i) {
    s = step_state(model, s, rng);
    t.states.push_back(s);
  }
  return t;
}

std::vector<ChannelOccupancyTrace> simulate_occupancy(std::span<const TwoStateMarkov> models,
                                                      std::size_t horizon, Rng& rng) {
  std::vector<ChannelOccupancyTrace> out;
  out.reserve(models.size());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t c = 0; c < models.size(); ++c) {
    const auto& m = models[c];
    m.validate();
    ChannelState start = ChannelState::VACANT;
    if (!m.degenerate() && u(rng) >= m.stationary_vacancy()) start = ChannelState::OCCUPIED;
    auto trace = simulate_trace(m, horizon, start, static_cast<int>(c), rng);
    trace.degenerate_start = m.degenerate();
    out.push_back(std::move(trace));
  }
  return out;
}

}  // namespace cogniscope
