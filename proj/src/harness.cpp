#include "cogniscope/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/non_central_chi_squared.hpp>

namespace cogniscope {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string opt(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

double modulation_m42(ModulationType m) {
  const auto c = make_constellation(m);
  double s = 0.0;
  for (const auto& p : c.points) s += std::norm(p) * std::norm(p);
  return s / static_cast<double>(c.points.size());
}

bool constant_modulus(ModulationType m) { return m != ModulationType::QAM16; }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// fig3

HypothesisSet fig3_hypotheses(const Fig3Config& c) {
  HypothesisSet h{c.noise_variance, c.power_levels, std::nullopt};
  h.validate();
  return h;
}

MetricOptions fig3_options(const Fig3Config& c) {
  MetricOptions o;
  o.model = c.statistic == "gaussian" ? StatisticModel::gaussian : StatisticModel::exact_gamma;
  o.fixed_pfa = c.fix_pfa;
  return o;
}

DetectionMetrics monte_carlo_metrics(const HypothesisSet& hyp, std::size_t n, std::size_t trials,
                                     const std::string& signal, std::optional<double> idle_threshold,
                                     Rng& rng) {
  const std::size_t levels = hyp.size();
  std::vector<std::vector<double>> confusion(levels, std::vector<double>(levels, 0.0));
  std::vector<cplx> buf(n);
  for (std::size_t i = 0; i < levels; ++i) {
    const double mu = hyp.mean(i);
    const double power = hyp.power_levels[i];
    std::gamma_distribution<double> gamma(static_cast<double>(n), mu / static_cast<double>(n));
    std::normal_distribution<double> gauss(0.0, std::sqrt(mu / 2.0));
    TransmitPattern pattern;
    if (signal != "gaussian" && power > 0.0) pattern = TransmitPattern::make(parse_modulation(signal), power);
    for (std::size_t t = 0; t < trials; ++t) {
      double e = 0.0;
      if (signal == "gaussian") {
        if (n > 256) {
          e = gamma(rng);
        } else {
          for (std::size_t k = 0; k < n; ++k) {
            const double re = gauss(rng), im = gauss(rng);
            e += re * re + im * im;
          }
          e /= static_cast<double>(n);
        }
      } else {
        synthesize_samples(pattern, hyp.noise_variance, buf, rng);
        for (const auto& x : buf) e += std::norm(x);
        e /= static_cast<double>(n);
      }
      const std::size_t d = idle_threshold ? threshold_decide(e, hyp, n, *idle_threshold) : ml_decide(e, hyp, n);
      confusion[i][d] += 1.0;
    }
    for (double& p : confusion[i]) p /= static_cast<double>(trials);
  }
  return metrics_from_confusion(std::move(confusion), n);
}

Fig3Result run_fig3(const Fig3Config& config, std::uint64_t seed) {
  const auto hyp = fig3_hypotheses(config);
  const auto opts = fig3_options(config);
  Fig3Result r;
  r.curve = metric_curve(hyp, config.n_grid, opts);
  if (config.monte_carlo_trials > 0) {
    for (std::size_t g = 0; g < config.n_grid.size(); ++g) {
      const std::size_t n = config.n_grid[g];
      std::optional<double> threshold;
      if (config.fix_pfa) threshold = idle_threshold_for_pfa(hyp, n, *config.fix_pfa, opts.model);
      Rng rng = make_stream(seed, "fig3-detect-curve", "detect-mc", g);
      r.monte_carlo.push_back(
          monte_carlo_metrics(hyp, n, config.monte_carlo_trials, config.mc_signal, threshold, rng));
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// fig4

std::vector<double> fig4_power_levels(const Fig4Config& c) {
  const double mean_active = c.noise_variance * std::pow(10.0, c.snr_db / 10.0);
  const double ratio_mean = mean_of(c.active_power_ratios);
  std::vector<double> levels{0.0};
  for (double r : c.active_power_ratios) levels.push_back(mean_active * r / ratio_mean);
  std::sort(levels.begin(), levels.end());
  return levels;
}

double fig4_state_log_likelihood(const Fig4Config& c, double power, const EnergyFeatureVector& v) {
  const auto mod = parse_modulation(c.modulation);
  const double n = static_cast<double>(c.samples_per_slot);
  const double s2 = c.noise_variance;
  double ll = 0.0;
  for (double e : v.energies) {
    double term = -std::numeric_limits<double>::infinity();
    if (power == 0.0 || constant_modulus(mod)) {
      // 2 n e / s2 is (noncentral) chi-square with 2n degrees of freedom.
      const double x = 2.0 * n * e / s2;
      double pdf = 0.0;
      if (power == 0.0) {
        pdf = boost::math::pdf(boost::math::chi_squared_distribution<double>(2.0 * n), x);
      } else {
        pdf = boost::math::pdf(
            boost::math::non_central_chi_squared_distribution<double>(2.0 * n, 2.0 * n * power / s2), x);
      }
      term = std::log(pdf) + std::log(2.0 * n / s2);
    }
    if (!std::isfinite(term)) {
      const double mu = power + s2;
      const double var = (power * power * (modulation_m42(mod) - 1.0) + 2.0 * power * s2 + s2 * s2) / n;
      term = -0.5 * std::log(var) - (e - mu) * (e - mu) / (2.0 * var);
    }
    ll += term;
  }
  return ll;
}

Fig4Trial run_fig4_trial(const Fig4Config& c, std::uint64_t seed, std::size_t trial) {
  Fig4Trial r;
  r.true_powers = fig4_power_levels(c);
  const auto mod = parse_modulation(c.modulation);
  const SlotConfig slots{c.slots_per_frame, c.samples_per_slot};
  Rng sig = make_stream(seed, "fig4-power-clustering", "signal_model", trial);
  Rng learn = make_stream(seed, "fig4-power-clustering", "learn_power", trial);

  auto frames = [&](std::size_t per_state, std::vector<EnergyFeatureVector>& out, std::vector<int>* labels) {
    for (std::size_t s = 0; s < r.true_powers.size(); ++s) {
      const double p = r.true_powers[s];
      const auto pattern = p == 0.0 ? TransmitPattern::idle() : TransmitPattern::make(mod, p);
      for (std::size_t f = 0; f < per_state; ++f) {
        out.push_back(energy_features(synthesize_frame(pattern, c.noise_variance, slots, sig)));
        if (labels) labels->push_back(static_cast<int>(s));
      }
    }
  };
  frames(c.train_frames_per_state, r.train, nullptr);
  frames(c.test_frames_per_state, r.test, &r.test_labels);

  r.clustering = cluster_energy(r.train, {c.k_max, c.restarts}, learn);
  r.states = estimate_power_states(r.clustering);
  if (r.clustering.k >= 2) {
    SvmConfig svm;
    svm.c = c.svm_c;
    svm.tolerance = c.svm_tolerance;
    r.classifier = train_classifier(label_by_state(r.train, r.clustering, r.states),
                                    c.kernel == "gaussian" ? Kernel::Kind::gaussian : Kernel::Kind::linear, svm);
  }

  std::size_t hits = 0, bayes_hits = 0;
  for (std::size_t i = 0; i < r.test.size(); ++i) {
    const int predicted = r.classifier ? classify(*r.classifier, r.test[i]) : 0;
    hits += predicted == r.test_labels[i];
    int best = 0;
    double best_ll = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < r.true_powers.size(); ++s) {
      const double ll = fig4_state_log_likelihood(c, r.true_powers[s], r.test[i]);
      if (ll > best_ll) {
        best_ll = ll;
        best = static_cast<int>(s);
      }
    }
    bayes_hits += best == r.test_labels[i];
  }
  r.test_accuracy = static_cast<double>(hits) / static_cast<double>(r.test.size());
  r.bayes_accuracy = static_cast<double>(bayes_hits) / static_cast<double>(r.test.size());
  return r;
}

// ---------------------------------------------------------------------------
// fig5

std::vector<Fig5Pattern> fig5_patterns(const Fig5Config& c) {
  double root_sum = 0.0;
  for (double r : c.power_sq_ratios) root_sum += std::sqrt(r);
  const double mean_active = c.noise_variance * std::pow(10.0, c.snr_db / 10.0);
  const double scale = mean_active * static_cast<double>(c.power_sq_ratios.size()) / root_sum;
  std::vector<Fig5Pattern> out;
  for (std::size_t i = 0; i < c.modulations.size(); ++i)
    out.push_back({parse_modulation(c.modulations[i]), scale * std::sqrt(c.power_sq_ratios[i])});
  if (c.include_idle) out.push_back({ModulationType::NOISE_ONLY, 0.0});
  return out;
}

DPGMMConfig fig5_dpgmm_config(const Fig5Config& c, std::uint64_t seed) {
  DPGMMConfig d;
  d.concentration = c.concentration;
  d.prior_scale = c.prior_scale;
  d.prior_dof = c.prior_dof;
  d.prior_precision_scale = c.prior_precision_scale;
  d.n_sweeps = c.n_sweeps;
  d.burn_in = c.burn_in;
  d.seed = seed;
  return d;
}

Fig5Trial run_fig5_trial(const Fig5Config& c, std::uint64_t seed, std::size_t trial) {
  Fig5Trial r;
  r.patterns = fig5_patterns(c);
  Rng sig = make_stream(seed, "fig5-modulation-dpgmm", "signal_model", trial);
  std::vector<cplx> buf(c.samples_per_vector);

  auto draw = [&](std::size_t per_pattern) {
    std::vector<CumulantVector> out;
    for (const auto& p : r.patterns) {
      const auto pattern = p.power == 0.0 ? TransmitPattern::idle() : TransmitPattern::make(p.modulation, p.power);
      for (std::size_t k = 0; k < per_pattern; ++k) {
        synthesize_samples(pattern, c.noise_variance, buf, sig);
        auto v = estimate_cumulants(buf);
        v.truth_label = pattern;
        out.push_back(v);
      }
    }
    std::shuffle(out.begin(), out.end(), sig);
    return out;
  };
  r.train = draw(c.vectors_per_pattern);
  const auto holdout = draw(c.holdout_per_pattern);

  const std::uint64_t chain_seed = derive_seed(seed, "fig5-modulation-dpgmm", "learn_mod", trial);
  r.model = fit_patterns(r.train, fig5_dpgmm_config(c, chain_seed));
  r.dominant_components = r.model.dominant(c.dominance).size();
  r.noise = identify_noise_component(r.model, c.noise_gate, c.dominance);
  r.match = match_patterns(r.model, ModulationDictionary::standard(),
                           r.noise.idle_observed() ? r.noise.noise_variance : 0.0, r.noise.component_id,
                           c.dominance);

  // Majority generator label per component.
  std::vector<std::map<ModulationType, std::size_t>> votes(r.model.components.size());
  for (std::size_t i = 0; i < r.train.size(); ++i)
    ++votes[r.model.assignments[i]][r.train[i].truth_label->modulation];
  auto majority = [&](std::size_t k) {
    ModulationType best = ModulationType::NOISE_ONLY;
    std::size_t n = 0;
    for (const auto& [m, cnt] : votes[k])
      if (cnt > n) {
        n = cnt;
        best = m;
      }
    return best;
  };

  std::set<ModulationType> expected, found;
  for (const auto& p : r.patterns)
    if (p.power > 0.0) expected.insert(p.modulation);
  bool consistent = r.noise.idle_observed() == c.include_idle;
  if (r.noise.idle_observed() && majority(*r.noise.component_id) != ModulationType::NOISE_ONLY) consistent = false;
  for (const auto& a : r.match.assignments) {
    if (majority(*a.component_id) != a.modulation) consistent = false;
    if (!found.insert(a.modulation).second) consistent = false;
  }
  r.modulations_correct = consistent && found == expected;

  double true_total = 0.0, est_total = 0.0;
  std::vector<double> est(c.modulations.size(), kNaN);
  for (std::size_t i = 0; i < c.modulations.size(); ++i) {
    true_total += c.power_sq_ratios[i];
    const auto mod = parse_modulation(c.modulations[i]);
    std::size_t weight = 0;
    for (const auto& a : r.match.assignments) {
      const auto cnt = r.model.components[*a.component_id].count;
      if (a.modulation == mod && cnt > weight) {
        weight = cnt;
        est[i] = a.estimated_power * a.estimated_power;
      }
    }
    if (!std::isnan(est[i])) est_total += est[i];
  }
  for (std::size_t i = 0; i < c.modulations.size(); ++i)
    r.ratio_quotients.push_back((est[i] / est_total) / (c.power_sq_ratios[i] / true_total));

  std::size_t hits = 0;
  for (const auto& v : holdout) {
    const auto a = classify_vector(r.model, r.match.assignments, v, r.noise.component_id);
    hits += !a.unknown && a.modulation == v.truth_label->modulation;
  }
  r.holdout_accuracy = holdout.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(holdout.size());
  return r;
}

std::string fig5_components_csv(const Fig5Trial& r) {
  std::ostringstream comps;
  comps << "component,weight,mu_c21,mu_c40,mu_c42,matched_mod,est_power\n";
  for (std::size_t k = 0; k < r.model.components.size(); ++k) {
    const auto& comp = r.model.components[k];
    std::string mod;
    std::string power;
    if (r.noise.component_id == k) {
      mod = "NOISE_ONLY";
      power = "0";
    }
    for (const auto& a : r.match.assignments)
      if (a.component_id == k) {
        mod = std::string(to_string(a.modulation));
        power = format_number(a.estimated_power);
      }
    comps << k << ',' << format_number(comp.weight) << ',' << format_number(comp.mean[0]) << ','
          << format_number(comp.mean[1]) << ',' << format_number(comp.mean[2]) << ',' << mod << ',' << power << '\n';
  }
  return comps.str();
}

// ---------------------------------------------------------------------------
// fig6

std::vector<TwoStateMarkov> fig6_channels(const Fig6Config& c, double vacancy) {
  std::vector<TwoStateMarkov> out;
  for (std::size_t ch = 0; ch < c.channels; ++ch) {
    const double offset = c.channels > 1 ? static_cast<double>(ch) / static_cast<double>(c.channels - 1) - 0.5 : 0.0;
    const double v = std::clamp(vacancy + c.spread * offset, 0.01, 0.99);
    out.push_back(TwoStateMarkov::from_stationary(v, c.persistence));
  }
  return out;
}

PolicyConfig fig6_policy(const Fig6Config& c) {
  PolicyConfig p;
  p.budget = c.budget;
  p.horizon = c.horizon;
  p.capacity = c.capacity;
  p.smoothing = c.smoothing;
  p.exploration = c.exploration;
  p.sensing_error = {c.sensing_error};
  p.sensing = c.sensing == "energy_detector" ? SensingMode::energy_detector : SensingMode::bernoulli;
  p.detector_snr_db = c.detector_snr_db;
  p.detector_samples = c.detector_samples;
  return p;
}

std::vector<Fig6Point> run_fig6(const Fig6Config& c, std::uint64_t seed) {
  const auto policy = fig6_policy(c);
  std::vector<Fig6Point> out;
  for (std::size_t g = 0; g < c.vacancy_grid.size(); ++g) {
    Fig6Point pt;
    pt.vacancy = c.vacancy_grid[g];
    const auto models = fig6_channels(c, pt.vacancy);
    std::vector<double> learned, random, err, diff;
    for (std::size_t t = 0; t < c.trials; ++t) {
      Rng rng = make_stream(seed, "fig6-occupancy-prediction", "predict_occ", g * c.trials + t);
      const auto run = run_policy(models, policy, rng);
      pt.trials.push_back(run.report);
      learned.push_back(run.report.mean_throughput);
      random.push_back(run.report.baseline_mean_throughput);
      err.push_back(run.report.mean_prediction_error);
      diff.push_back(run.report.mean_throughput - run.report.baseline_mean_throughput);
    }
    pt.mean_learned = mean_of(learned);
    pt.mean_random = mean_of(random);
    pt.mean_prediction_error = mean_of(err);
    pt.diff_mean = mean_of(diff);
    pt.diff_std_error = std_error(diff);
    out.push_back(std::move(pt));
  }
  return out;
}

// ---------------------------------------------------------------------------
// bundles

namespace {

void bundle_fig3(const ExperimentConfig& cfg, ResultBundle& b) {
  const auto r = run_fig3(cfg.fig3, cfg.seed);
  const bool mc = !r.monte_carlo.empty();
  std::ostringstream csv;
  csv << "n,pfa,pd,pdisc" << (mc ? ",pfa_mc,pd_mc,pdisc_mc" : "") << '\n';
  double worst = 0.0;
  for (std::size_t i = 0; i < r.curve.points.size(); ++i) {
    const auto& p = r.curve.points[i];
    csv << p.sample_count << ',' << format_number(p.p_false_alarm) << ',' << opt(p.p_detection) << ','
        << opt(p.p_discrimination);
    if (mc) {
      const auto& m = r.monte_carlo[i];
      csv << ',' << format_number(m.p_false_alarm) << ',' << opt(m.p_detection) << ',' << opt(m.p_discrimination);
      worst = std::max(worst, std::abs(m.p_false_alarm - p.p_false_alarm));
      if (p.p_detection) {
        worst = std::max(worst, std::abs(*m.p_detection - *p.p_detection));
        worst = std::max(worst, std::abs(*m.p_discrimination - *p.p_discrimination));
      }
    }
    csv << '\n';
  }
  b.tables.push_back({"curve", csv.str()});
  b.summary["metrics"] = {{"pd_non_decreasing", r.curve.pd_non_decreasing},
                          {"pdisc_non_decreasing", r.curve.pdisc_non_decreasing},
                          {"pdisc_below_pd", r.curve.pdisc_below_pd},
                          {"active_levels", cfg.fig3.power_levels.size() - 1}};
  if (mc) b.summary["metrics"]["max_abs_theory_mc_gap"] = worst;
  b.log.push_back("pdisc non-decreasing: " + std::string(r.curve.pdisc_non_decreasing ? "yes" : "no"));
}

void bundle_fig4(const ExperimentConfig& cfg, ResultBundle& b) {
  const auto& c = cfg.fig4;
  std::ostringstream trials;
  trials << "trial,k,true_states,test_accuracy,bayes_accuracy\n";
  nlohmann::json per_trial = nlohmann::json::array();
  std::size_t correct_k = 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const auto r = run_fig4_trial(c, cfg.seed, t);
    correct_k += r.clustering.k == r.true_powers.size();
    trials << t << ',' << r.clustering.k << ',' << r.true_powers.size() << ',' << format_number(r.test_accuracy)
           << ',' << format_number(r.bayes_accuracy) << '\n';
    std::vector<double> powers;
    for (double p : r.states.state_powers) powers.push_back(p);
    per_trial.push_back({{"k", r.clustering.k},
                         {"noise_energy", r.states.noise_energy},
                         {"state_powers", powers},
                         {"test_accuracy", r.test_accuracy},
                         {"bayes_accuracy", r.bayes_accuracy}});
    if (t != 0) continue;

    std::ostringstream feats, clusters, states;
    feats << "frame_id";
    for (std::size_t s = 0; s < c.slots_per_frame; ++s) feats << ",slot_" << s;
    feats << ",n_samples,truth_mod,truth_power\n";
    clusters << "frame_id,cluster,state\n";
    for (std::size_t i = 0; i < r.train.size(); ++i) {
      feats << i;
      for (double e : r.train[i].energies) feats << ',' << format_number(e);
      feats << ',' << c.samples_per_slot << ',' << to_string(r.train[i].truth_label->modulation) << ','
            << format_number(r.train[i].truth_label->power) << '\n';
      clusters << i << ',' << r.clustering.assignments[i] << ','
               << r.states.cluster_to_state[r.clustering.assignments[i]] << '\n';
    }
    states << "state,power\n";
    for (std::size_t s = 0; s < r.states.state_powers.size(); ++s)
      states << s << ',' << format_number(r.states.state_powers[s]) << '\n';
    b.tables.push_back({"features", feats.str()});
    b.tables.push_back({"clusters", clusters.str()});
    b.tables.push_back({"states", states.str()});
    if (r.classifier && c.slots_per_frame == 2) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (const auto& v : r.train)
        for (double e : v.energies) {
          lo = std::min(lo, e);
          hi = std::max(hi, e);
        }
      const double pad = 0.05 * (hi - lo);
      std::ostringstream grid;
      grid << "e0,e1,decision\n";
      for (const auto& p : sample_boundary(*r.classifier, lo - pad, hi + pad, lo - pad, hi + pad, c.boundary_steps))
        grid << format_number(p.e0) << ',' << format_number(p.e1) << ',' << p.decision << '\n';
      b.tables.push_back({"boundary", grid.str()});
    }
  }
  b.tables.push_back({"trials", trials.str()});
  b.summary["metrics"] = {{"trials", per_trial},
                          {"true_states", fig4_power_levels(c).size()},
                          {"trials_with_correct_k", correct_k}};
  b.log.push_back("correct state count in " + std::to_string(correct_k) + "/" + std::to_string(c.trials) + " trials");
}

void bundle_fig5(const ExperimentConfig& cfg, ResultBundle& b) {
  const auto& c = cfg.fig5;
  std::ostringstream trials;
  trials << "trial,dominant_components,noise_variance,modulations_correct,holdout_accuracy\n";
  nlohmann::json per_trial = nlohmann::json::array();
  for (std::size_t t = 0; t < c.trials; ++t) {
    const auto r = run_fig5_trial(c, cfg.seed, t);
    trials << t << ',' << r.dominant_components << ',' << opt(r.noise.idle_observed() ? std::optional<double>(r.noise.noise_variance) : std::nullopt)
           << ',' << (r.modulations_correct ? 1 : 0) << ',' << format_number(r.holdout_accuracy) << '\n';
    nlohmann::json quotients = nlohmann::json::array();
    for (double q : r.ratio_quotients) quotients.push_back(std::isnan(q) ? nlohmann::json(nullptr) : nlohmann::json(q));
    per_trial.push_back({{"dominant_components", r.dominant_components},
                         {"idle_observed", r.noise.idle_observed()},
                         {"noise_variance", r.noise.noise_variance},
                         {"modulations_correct", r.modulations_correct},
                         {"power_sq_share_quotients", quotients},
                         {"holdout_accuracy", r.holdout_accuracy},
                         {"active_dictionary_entries", r.match.dictionary.active_count()}});
    if (t != 0) continue;
    b.summary["dominant_components"] = r.dominant_components;

    std::ostringstream feats;
    feats << "frame_id,c21,c40,c42,n_samples,truth_mod,truth_power\n";
    for (std::size_t i = 0; i < r.train.size(); ++i) {
      const auto& v = r.train[i];
      feats << i << ',' << format_number(v.c21()) << ',' << format_number(v.c40()) << ',' << format_number(v.c42())
            << ',' << v.sample_count << ',' << to_string(v.truth_label->modulation) << ','
            << format_number(v.truth_label->power) << '\n';
    }
    b.tables.push_back({"features", feats.str()});
    b.tables.push_back({"components", fig5_components_csv(r)});
  }
  b.tables.push_back({"trials", trials.str()});
  b.summary["metrics"] = {{"trials", per_trial}};
  b.log.push_back("dominant components (trial 0): " + b.summary["dominant_components"].dump());
}

void bundle_fig6(const ExperimentConfig& cfg, ResultBundle& b) {
  const auto pts = run_fig6(cfg.fig6, cfg.seed);
  std::ostringstream csv;
  csv << "vacancy_prob,mean_throughput_learned,mean_throughput_random,mean_pred_error\n";
  nlohmann::json per_point = nlohmann::json::array();
  for (const auto& p : pts) {
    csv << format_number(p.vacancy) << ',' << format_number(p.mean_learned) << ',' << format_number(p.mean_random)
        << ',' << format_number(p.mean_prediction_error) << '\n';
    per_point.push_back({{"vacancy_prob", p.vacancy},
                         {"learned_minus_random", p.diff_mean},
                         {"std_error", p.diff_std_error},
                         {"analytic_random", analytic_throughput(p.vacancy, cfg.fig6.sensing_error, cfg.fig6.budget,
                                                                 cfg.fig6.capacity)}});
  }
  b.tables.push_back({"curve", csv.str()});
  b.summary["metrics"] = {{"points", per_point}};
}

}  // namespace

ResultBundle run_experiment(const ExperimentConfig& config) {
  ResultBundle b;
  b.experiment = config.experiment;
  b.config_hash = config_hash(config);
  b.seed = config.seed;
  b.log.push_back("experiment " + config.experiment);
  b.log.push_back("config_hash " + b.config_hash);
  b.log.push_back("seed " + std::to_string(config.seed));
  for (const auto& w : config.warnings) b.log.push_back("warning: " + w);
  b.summary["experiment"] = config.experiment;
  b.summary["config_hash"] = b.config_hash;
  b.summary["seed"] = config.seed;
  b.summary["warnings"] = config.warnings;
  b.summary["config"] = to_json(config);
  b.summary["config"].erase("output_dir");

  if (config.experiment == "fig3-detect-curve") bundle_fig3(config, b);
  else if (config.experiment == "fig4-power-clustering") bundle_fig4(config, b);
  else if (config.experiment == "fig5-modulation-dpgmm") bundle_fig5(config, b);
  else if (config.experiment == "fig6-occupancy-prediction") bundle_fig6(config, b);
  else throw ConfigError("experiment", "unknown experiment id '" + config.experiment + "'");

  std::vector<std::string> names;
  for (const auto& t : b.tables) names.push_back(config.experiment + "_" + t.name + ".csv");
  b.summary["tables"] = names;
  return b;
}

void write_bundle(const ResultBundle& b, const ExperimentConfig& config) {
  namespace fs = std::filesystem;
  const fs::path dir(config.output_dir);
  fs::create_directories(dir);
  auto write = [&](const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << content;
  };
  if (config.emits("csv"))
    for (const auto& t : b.tables) write(dir / (b.experiment + "_" + t.name + ".csv"), t.content);
  if (config.emits("json")) write(dir / (b.experiment + "_summary.json"), b.summary.dump(2) + "\n");
  if (config.emits("log")) {
    std::string log;
    for (const auto& line : b.log) log += line + '\n';
    write(dir / (b.experiment + ".log"), log);
  }
}

}  // namespace cogniscope
