#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cogniscope/predict_occ.hpp"

using namespace cogniscope;

namespace {

constexpr auto V = ChannelState::VACANT;
constexpr auto O = ChannelState::OCCUPIED;

ChannelOccupancyTrace trace(std::vector<ChannelState> s, int id = 0) {
  ChannelOccupancyTrace t;
  t.states = std::move(s);
  t.channel_id = id;
  return t;
}

}  // namespace

TEST_CASE("fit_history trivial cases") {
  const auto vac = fit_history({trace({V, V, V, V})}, 0.0);
  CHECK(vac.at(0).chain.p_occupy_given_vacant == 0.0);
  CHECK(vac.at(0).observations == 4);
  const auto alt = fit_history({trace({V, O, V, O, V})}, 0.0);
  CHECK(alt.at(0).chain.p_occupy_given_vacant == 1.0);
  CHECK(alt.at(0).chain.p_vacate_given_occupied == 1.0);
  const auto smooth = fit_history({trace({V, V})}, 1.0);
  CHECK(smooth.at(0).chain.p_occupy_given_vacant == doctest::Approx(1.0 / 3.0));
  CHECK(smooth.at(0).chain.p_vacate_given_occupied == doctest::Approx(0.5));

  CHECK_THROWS_AS(fit_history({trace({V})}), std::invalid_argument);
  CHECK_THROWS_AS(fit_history({trace({V, V}, 1), trace({V, O}, 1)}), std::invalid_argument);
  CHECK_THROWS_AS(fit_history({trace({V, V})}, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(vac.at(7), std::invalid_argument);
}

TEST_CASE("Markov fit recovers the generator") {
  Rng rng(31);
  const TwoStateMarkov truth{0.2, 0.3};
  const auto t = simulate_trace(truth, 100'000, V, 0, rng);
  const auto fit = fit_history({t}, 1.0);
  CHECK(std::abs(fit.at(0).chain.p_occupy_given_vacant - 0.2) < 0.01);
  CHECK(std::abs(fit.at(0).chain.p_vacate_given_occupied - 0.3) < 0.01);
  const auto& c = fit.at(0).counts;
  CHECK(c[0][0] + c[0][1] + c[1][0] + c[1][1] == 99'999);
}

TEST_CASE("next-slot forecast") {
  FittedChannelModel m;
  m.channels = {{0, {1.0, 1.0}, {}, 0}, {1, {0.0, 0.5}, {}, 0}, {2, {0.3, 0.4}, {}, 0}};
  const auto f = predict_next(m, {{0, V}, {1, V}, {2, O}});
  CHECK(f.vacancy_probability.at(0) == 0.0);
  CHECK(f.vacancy_probability.at(1) == 1.0);
  CHECK(f.vacancy_probability.at(2) == doctest::Approx(0.4));
  CHECK(f.ranking == std::vector<int>{1, 2, 0});
  CHECK_THROWS_AS(predict_next(m, {{9, V}}), std::invalid_argument);

  // Ties break toward the lower id.
  FittedChannelModel tie;
  tie.channels = {{0, {0.5, 0.5}, {}, 0}, {1, {0.5, 0.5}, {}, 0}};
  CHECK(predict_next(tie, {{1, V}, {0, V}}).ranking == std::vector<int>{0, 1});
}

TEST_CASE("multi-step vacancy converges to the stationary law") {
  const TwoStateMarkov c{0.2, 0.3};
  CHECK(vacancy_after(c, V, 0) == 1.0);
  CHECK(vacancy_after(c, V, 1) == doctest::Approx(0.8));
  CHECK(vacancy_after(c, O, 1) == doctest::Approx(0.3));
  CHECK(vacancy_after(c, O, 200) == doctest::Approx(0.6));
  // Two steps by hand: 0.8 * 0.8 + 0.2 * 0.3.
  CHECK(vacancy_after(c, V, 2) == doctest::Approx(0.7));
}

TEST_CASE("forecast matches empirical next-slot frequency") {
  Rng rng(32);
  const TwoStateMarkov truth{0.15, 0.35};
  const auto t = simulate_trace(truth, 100'000, V, 0, rng);
  FittedChannelModel m;
  m.channels = {{0, truth, {}, 0}};
  double vac_after_vac = 0, n_vac = 0, vac_after_occ = 0, n_occ = 0;
  for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
    if (t.states[i] == V) {
      ++n_vac;
      vac_after_vac += t.states[i + 1] == V;
    } else {
      ++n_occ;
      vac_after_occ += t.states[i + 1] == V;
    }
  }
  CHECK(std::abs(vac_after_vac / n_vac - predict_next(m, {{0, V}}).vacancy_probability.at(0)) < 0.01);
  CHECK(std::abs(vac_after_occ / n_occ - predict_next(m, {{0, O}}).vacancy_probability.at(0)) < 0.01);
}

TEST_CASE("forecasts from a fitted model are calibrated") {
  Rng rng(33);
  std::vector<TwoStateMarkov> truths{{0.1, 0.4}, {0.3, 0.2}, {0.5, 0.5}, {0.05, 0.7}};
  const auto traces = simulate_occupancy(truths, 100'000, rng);
  const auto fit = fit_history(traces, 1.0);
  // Bin forecasts in tenths and compare to outcomes.
  std::vector<double> sum_p(10, 0.0), sum_y(10, 0.0), n(10, 0.0);
  for (const auto& t : traces)
    for (std::size_t i = 0; i + 1 < t.states.size(); ++i) {
      const double p = vacancy_after(fit.at(t.channel_id).chain, t.states[i], 1);
      const auto b = std::min<std::size_t>(9, static_cast<std::size_t>(p * 10));
      sum_p[b] += p;
      sum_y[b] += t.states[i + 1] == V;
      n[b] += 1;
    }
  for (std::size_t b = 0; b < 10; ++b)
    if (n[b] > 1000) CHECK(std::abs(sum_p[b] / n[b] - sum_y[b] / n[b]) < 0.02);
}

TEST_CASE("history database") {
  HistoryDatabase db(2);
  db.record(0, 0, V);
  db.record(0, 1, O);
  db.record(0, 3, V);  // gap: no transition
  db.record(1, 5, O);
  CHECK(db.size() == 4);
  CHECK(db.counts(0)[0][1] == 1);
  CHECK(db.counts(0)[1][0] == 0);
  CHECK_THROWS(db.record(0, 2, V));  // out of order
  CHECK_THROWS(db.record(5, 0, V));
  std::stringstream s;
  db.write_csv(s);
  CHECK(s.str().rfind("channel,slot,sensed_state\n0,0,VACANT\n", 0) == 0);
  const auto back = HistoryDatabase::read_csv(s);
  CHECK(back.size() == 4);
  CHECK(back.records(0) == db.records(0));
  CHECK(back.counts(0) == db.counts(0));
  std::stringstream bad("channel,slot,sensed_state\n0,1,MAYBE\n");
  CHECK_THROWS(HistoryDatabase::read_csv(bad));
}

TEST_CASE("policy bounds and closure") {
  PolicyConfig cfg;
  cfg.horizon = 500;
  cfg.budget = 3;
  SUBCASE("always vacant, perfect sensing") {
    cfg.sensing_error = {0.0};
    Rng rng(1);
    const auto r = run_policy(std::vector<TwoStateMarkov>(6, {0.0, 1.0}), cfg, rng);
    CHECK(r.report.mean_throughput == doctest::Approx(3.0));
    CHECK(r.report.baseline_mean_throughput == doctest::Approx(3.0));
  }
  SUBCASE("always occupied") {
    Rng rng(2);
    const auto r = run_policy(std::vector<TwoStateMarkov>(6, {1.0, 0.0}), cfg, rng);
    CHECK(r.report.mean_throughput == 0.0);
    CHECK(r.report.baseline_mean_throughput == 0.0);
  }
  SUBCASE("database closure") {
    Rng rng(3);
    std::vector<TwoStateMarkov> ms{{0.1, 0.5}, {0.4, 0.4}, {0.2, 0.2}, {0.6, 0.1}, {0.3, 0.3}};
    const auto r = run_policy(ms, cfg, rng);
    CHECK(r.database.size() == cfg.horizon * cfg.budget);
    const auto refit = r.database.refit(cfg.smoothing);
    for (int c = 0; c < 5; ++c) {
      CHECK(refit.at(c).chain.p_occupy_given_vacant == r.final_model.at(c).chain.p_occupy_given_vacant);
      CHECK(refit.at(c).chain.p_vacate_given_occupied == r.final_model.at(c).chain.p_vacate_given_occupied);
    }
    CHECK(r.report.mean_throughput <= cfg.budget * cfg.capacity);
    CHECK(r.report.mean_throughput >= 0.0);
  }
  SUBCASE("invalid budget") {
    Rng rng(4);
    cfg.budget = 7;
    CHECK_THROWS_AS(run_policy(std::vector<TwoStateMarkov>(6, {0.5, 0.5}), cfg, rng), std::invalid_argument);
    cfg.budget = 0;
    CHECK_THROWS_AS(run_policy(std::vector<TwoStateMarkov>(6, {0.5, 0.5}), cfg, rng), std::invalid_argument);
  }
}

TEST_CASE("learned ranking beats random on heterogeneous channels") {
  std::vector<TwoStateMarkov> ms;
  for (int c = 0; c < 10; ++c) ms.push_back(TwoStateMarkov::from_stationary(0.2 + 0.07 * c, 0.5));
  PolicyConfig cfg;
  cfg.horizon = 3000;
  cfg.budget = 3;
  double diff = 0.0;
  for (int s = 0; s < 5; ++s) {
    Rng rng(100 + s);
    const auto r = run_policy(ms, cfg, rng);
    diff += r.report.mean_throughput - r.report.baseline_mean_throughput;
  }
  CHECK(diff / 5 > 0.2);
}

TEST_CASE("analytic throughput") {
  CHECK(analytic_throughput(1.0, 0.0, 5, 1.0) == 5.0);
  CHECK(analytic_throughput(0.0, 0.1, 5, 1.0) == 0.0);
  CHECK_THROWS(analytic_throughput(1.2, 0.0, 5, 1.0));
  // iid channels with a common vacancy: every policy sees the same odds.
  const double v = 0.6, e = 0.1;
  std::vector<TwoStateMarkov> ms(25, TwoStateMarkov::from_stationary(v, 0.0));
  PolicyConfig cfg;
  cfg.horizon = 100'000;
  cfg.sensing_error = {e};
  Rng rng(5);
  const auto r = run_policy(ms, cfg, rng);
  const double a = analytic_throughput(v, e, cfg.budget, cfg.capacity);
  CHECK(std::abs(r.report.baseline_mean_throughput - a) / a < 0.05);
  CHECK(std::abs(r.report.mean_throughput - a) / a < 0.05);
}

TEST_CASE("energy-detector sensing mode runs") {
  PolicyConfig cfg;
  cfg.horizon = 200;
  cfg.sensing = SensingMode::energy_detector;
  cfg.detector_snr_db = 5.0;
  Rng rng(6);
  std::vector<TwoStateMarkov> ms(8, TwoStateMarkov::from_stationary(0.5, 0.5));
  const auto r = run_policy(ms, cfg, rng);
  CHECK(r.report.mean_throughput > 0.0);
  CHECK(r.report.mean_throughput <= 5.0);
}
