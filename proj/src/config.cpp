#include "cogniscope/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>

#include "cogniscope/rng.hpp"

namespace cogniscope {

using nlohmann::json;

namespace {

// Typed access to one JSON object; remembers which keys were consumed.
class Section {
 public:
  Section(const json& obj, std::string prefix, std::vector<std::string>& warnings)
      : obj_(obj), prefix_(std::move(prefix)), warnings_(warnings) {
    if (!obj_.is_object()) throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
  }

  ~Section() = default;

  void finish() {
    for (auto it = obj_.begin(); it != obj_.end(); ++it)
      if (!seen_.count(it.key())) warnings_.push_back("unknown key '" + path(it.key()) + "' ignored");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key) && !obj_.at(key).is_null();
  }

  double real(const std::string& key, double fallback,
              const std::function<bool(double)>& ok = {}, const char* expect = "a number") {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number()) throw ConfigError(path(key), std::string("expected ") + expect);
    const double d = v.get<double>();
    if (!std::isfinite(d) || (ok && !ok(d))) throw ConfigError(path(key), std::string("expected ") + expect);
    return d;
  }

  std::size_t count(const std::string& key, std::size_t fallback, std::size_t min_value) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min_value))
      throw ConfigError(path(key), "expected an integer >= " + std::to_string(min_value));
    return v.get<std::size_t>();
  }

  std::uint64_t u64(const std::string& key, std::uint64_t fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
      throw ConfigError(path(key), "expected an unsigned 64-bit integer");
    return v.get<std::uint64_t>();
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) throw ConfigError(path(key), "expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed = {}) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_string()) throw ConfigError(path(key), "expected a string");
    auto s = v.get<std::string>();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path(key), "expected one of {" + list + "}");
    }
    return s;
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback,
                            const std::function<bool(double)>& ok, const char* expect) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path(key), std::string("expected a non-empty list of ") + expect);
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number() || !ok(e.get<double>()))
        throw ConfigError(path(key), std::string("expected a non-empty list of ") + expect);
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::size_t> counts(const std::string& key, const std::vector<std::size_t>& fallback) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_array() || v.empty()) throw ConfigError(path(key), "expected a non-empty list of integers >= 1");
    std::vector<std::size_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 1)
        throw ConfigError(path(key), "expected a non-empty list of integers >= 1");
      out.push_back(e.get<std::size_t>());
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback,
                                 const std::vector<std::string>& allowed) {
    if (!has(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_array()) throw ConfigError(path(key), "expected a list of strings");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string() || std::find(allowed.begin(), allowed.end(), e.get<std::string>()) == allowed.end())
        throw ConfigError(path(key), "unexpected entry " + e.dump());
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  const json& child(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  std::string path(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

 private:
  const json& obj_;
  std::string prefix_;
  std::vector<std::string>& warnings_;
  std::set<std::string> seen_;
};

const auto positive = [](double v) { return v > 0.0; };
const auto non_negative = [](double v) { return v >= 0.0; };
const auto probability = [](double v) { return v >= 0.0 && v <= 1.0; };
const auto any_real = [](double) { return true; };

const std::vector<std::string> kModulations{"BPSK", "QPSK", "PSK8", "QAM16"};

Fig3Config parse_fig3(Section& s) {
  Fig3Config c;
  c.noise_variance = s.real("noise_variance", c.noise_variance, positive, "a number > 0");
  c.power_levels = s.reals("power_levels", c.power_levels, non_negative, "numbers >= 0");
  if (c.power_levels.front() != 0.0) throw ConfigError(s.path("power_levels"), "first level must be 0");
  for (std::size_t i = 1; i < c.power_levels.size(); ++i)
    if (!(c.power_levels[i] > c.power_levels[i - 1]))
      throw ConfigError(s.path("power_levels"), "levels must be strictly increasing");
  c.n_grid = s.counts("n_grid", c.n_grid);
  for (std::size_t i = 1; i < c.n_grid.size(); ++i)
    if (c.n_grid[i] <= c.n_grid[i - 1]) throw ConfigError(s.path("n_grid"), "grid must be strictly ascending");
  c.statistic = s.text("statistic", c.statistic, {"exact_gamma", "gaussian"});
  if (s.has("fix_pfa"))
    c.fix_pfa = s.real("fix_pfa", 0.0, [](double v) { return v > 0.0 && v < 1.0; }, "a probability in (0, 1)");
  c.monte_carlo_trials = s.count("monte_carlo_trials", c.monte_carlo_trials, 0);
  c.mc_signal = s.text("mc_signal", c.mc_signal, {"gaussian", "BPSK", "QPSK", "PSK8", "QAM16"});
  return c;
}

Fig4Config parse_fig4(Section& s) {
  Fig4Config c;
  c.snr_db = s.real("snr_db", c.snr_db);
  c.noise_variance = s.real("noise_variance", c.noise_variance, positive, "a number > 0");
  c.active_power_ratios = s.reals("active_power_ratios", c.active_power_ratios, positive, "numbers > 0");
  c.modulation = s.text("modulation", c.modulation, kModulations);
  c.slots_per_frame = s.count("slots_per_frame", c.slots_per_frame, 1);
  c.samples_per_slot = s.count("samples_per_slot", c.samples_per_slot, 1);
  c.train_frames_per_state = s.count("train_frames_per_state", c.train_frames_per_state, 2);
  c.test_frames_per_state = s.count("test_frames_per_state", c.test_frames_per_state, 1);
  c.k_max = s.count("k_max", c.k_max, 1);
  c.restarts = s.count("restarts", c.restarts, 1);
  c.kernel = s.text("kernel", c.kernel, {"linear", "gaussian"});
  c.svm_c = s.real("svm_c", c.svm_c, positive, "a number > 0");
  c.svm_tolerance = s.real("svm_tolerance", c.svm_tolerance, positive, "a number > 0");
  c.boundary_steps = s.count("boundary_steps", c.boundary_steps, 2);
  c.trials = s.count("trials", c.trials, 1);
  return c;
}

Fig5Config parse_fig5(Section& s) {
  Fig5Config c;
  c.snr_db = s.real("snr_db", c.snr_db);
  c.noise_variance = s.real("noise_variance", c.noise_variance, positive, "a number > 0");
  c.samples_per_vector = s.count("samples_per_vector", c.samples_per_vector, 4);
  c.vectors_per_pattern = s.count("vectors_per_pattern", c.vectors_per_pattern, 1);
  c.holdout_per_pattern = s.count("holdout_per_pattern", c.holdout_per_pattern, 0);
  c.modulations = s.texts("modulations", c.modulations, kModulations);
  c.power_sq_ratios = s.reals("power_sq_ratios", c.power_sq_ratios, positive, "numbers > 0");
  if (c.modulations.size() != c.power_sq_ratios.size())
    throw ConfigError(s.path("power_sq_ratios"), "needs one ratio per modulation");
  if (c.modulations.empty()) throw ConfigError(s.path("modulations"), "needs at least one modulation");
  c.include_idle = s.boolean("include_idle", c.include_idle);
  c.concentration = s.real("concentration", c.concentration, positive, "a number > 0");
  c.prior_scale = s.real("prior_scale", c.prior_scale, positive, "a number > 0");
  c.prior_dof = s.real("prior_dof", c.prior_dof, [](double v) { return v == 0.0 || v > 2.0; },
                       "0 (dim + 2) or a number > dim - 1 = 2");
  c.prior_precision_scale = s.real("prior_precision_scale", c.prior_precision_scale, positive, "a number > 0");
  c.n_sweeps = s.count("n_sweeps", c.n_sweeps, 1);
  c.burn_in = s.count("burn_in", c.burn_in, 0);
  if (c.burn_in >= c.n_sweeps) throw ConfigError(s.path("burn_in"), "expected an integer < n_sweeps");
  c.noise_gate = s.real("noise_gate", c.noise_gate, positive, "a number > 0");
  c.dominance = s.real("dominance", c.dominance, [](double v) { return v > 0.0 && v < 1.0; },
                       "a fraction in (0, 1)");
  c.trials = s.count("trials", c.trials, 1);
  return c;
}

Fig6Config parse_fig6(Section& s) {
  Fig6Config c;
  c.channels = s.count("channels", c.channels, 1);
  c.capacity = s.real("capacity", c.capacity, non_negative, "a number >= 0");
  c.budget = s.count("budget", c.budget, 1);
  if (c.budget > c.channels) throw ConfigError(s.path("budget"), "expected an integer <= channels");
  c.horizon = s.count("horizon", c.horizon, 1);
  c.vacancy_grid = s.reals("vacancy_grid", c.vacancy_grid, probability, "probabilities");
  c.spread = s.real("spread", c.spread, [](double v) { return v >= 0.0 && v <= 1.0; }, "a number in [0, 1]");
  c.persistence = s.real("persistence", c.persistence, [](double v) { return v >= 0.0 && v < 1.0; },
                         "a number in [0, 1)");
  c.sensing_error = s.real("sensing_error", c.sensing_error, probability, "a probability");
  c.smoothing = s.real("smoothing", c.smoothing, non_negative, "a number >= 0");
  c.exploration = s.real("exploration", c.exploration, non_negative, "a number >= 0");
  c.sensing = s.text("sensing", c.sensing, {"bernoulli", "energy_detector"});
  c.detector_snr_db = s.real("detector_snr_db", c.detector_snr_db);
  c.detector_samples = s.count("detector_samples", c.detector_samples, 1);
  c.trials = s.count("trials", c.trials, 1);
  return c;
}

}  // namespace

bool ExperimentConfig::emits(const std::string& kind) const {
  return std::find(emit.begin(), emit.end(), kind) != emit.end();
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig c;
  Section root(doc, "", c.warnings);
  c.experiment = root.text("experiment", c.experiment, experiment_ids());
  c.seed = root.u64("seed", c.seed);
  c.output_dir = root.text("output_dir", c.output_dir);
  c.emit = root.texts("emit", c.emit, {"csv", "json", "log"});
  if (root.has("fig3")) {
    Section s(root.child("fig3"), "fig3", c.warnings);
    c.fig3 = parse_fig3(s);
    s.finish();
  }
  if (root.has("fig4")) {
    Section s(root.child("fig4"), "fig4", c.warnings);
    c.fig4 = parse_fig4(s);
    s.finish();
  }
  if (root.has("fig5")) {
    Section s(root.child("fig5"), "fig5", c.warnings);
    c.fig5 = parse_fig5(s);
    s.finish();
  }
  if (root.has("fig6")) {
    Section s(root.child("fig6"), "fig6", c.warnings);
    c.fig6 = parse_fig6(s);
    s.finish();
  }
  root.finish();
  return c;
}

ExperimentConfig validate_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read config file '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

json to_json(const ExperimentConfig& c) {
  json j;
  j["experiment"] = c.experiment;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["emit"] = c.emit;
  j["fig3"] = {{"noise_variance", c.fig3.noise_variance},
               {"power_levels", c.fig3.power_levels},
               {"n_grid", c.fig3.n_grid},
               {"statistic", c.fig3.statistic},
               {"fix_pfa", c.fig3.fix_pfa ? json(*c.fig3.fix_pfa) : json(nullptr)},
               {"monte_carlo_trials", c.fig3.monte_carlo_trials},
               {"mc_signal", c.fig3.mc_signal}};
  j["fig4"] = {{"snr_db", c.fig4.snr_db},
               {"noise_variance", c.fig4.noise_variance},
               {"active_power_ratios", c.fig4.active_power_ratios},
               {"modulation", c.fig4.modulation},
               {"slots_per_frame", c.fig4.slots_per_frame},
               {"samples_per_slot", c.fig4.samples_per_slot},
               {"train_frames_per_state", c.fig4.train_frames_per_state},
               {"test_frames_per_state", c.fig4.test_frames_per_state},
               {"k_max", c.fig4.k_max},
               {"restarts", c.fig4.restarts},
               {"kernel", c.fig4.kernel},
               {"svm_c", c.fig4.svm_c},
               {"svm_tolerance", c.fig4.svm_tolerance},
               {"boundary_steps", c.fig4.boundary_steps},
               {"trials", c.fig4.trials}};
  j["fig5"] = {{"snr_db", c.fig5.snr_db},
               {"noise_variance", c.fig5.noise_variance},
               {"samples_per_vector", c.fig5.samples_per_vector},
               {"vectors_per_pattern", c.fig5.vectors_per_pattern},
               {"holdout_per_pattern", c.fig5.holdout_per_pattern},
               {"modulations", c.fig5.modulations},
               {"power_sq_ratios", c.fig5.power_sq_ratios},
               {"include_idle", c.fig5.include_idle},
               {"concentration", c.fig5.concentration},
               {"prior_scale", c.fig5.prior_scale},
               {"prior_dof", c.fig5.prior_dof},
               {"prior_precision_scale", c.fig5.prior_precision_scale},
               {"n_sweeps", c.fig5.n_sweeps},
               {"burn_in", c.fig5.burn_in},
               {"noise_gate", c.fig5.noise_gate},
               {"dominance", c.fig5.dominance},
               {"trials", c.fig5.trials}};
  j["fig6"] = {{"channels", c.fig6.channels},
               {"capacity", c.fig6.capacity},
               {"budget", c.fig6.budget},
               {"horizon", c.fig6.horizon},
               {"vacancy_grid", c.fig6.vacancy_grid},
               {"spread", c.fig6.spread},
               {"persistence", c.fig6.persistence},
               {"sensing_error", c.fig6.sensing_error},
               {"smoothing", c.fig6.smoothing},
               {"exploration", c.fig6.exploration},
               {"sensing", c.fig6.sensing},
               {"detector_snr_db", c.fig6.detector_snr_db},
               {"detector_samples", c.fig6.detector_samples},
               {"trials", c.fig6.trials}};
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  auto j = to_json(config);
  j.erase("output_dir");
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace cogniscope
