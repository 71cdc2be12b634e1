#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/special_functions/gamma.hpp>

#include "cogniscope/detect.hpp"
#include "cogniscope/rng.hpp"
#include "oracles.hpp"

using namespace cogniscope;

TEST_CASE("ml_decide basics") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  CHECK(ml_decide(2.0, h, 100) == 2);
  CHECK(ml_decide(1.0, h, 100) == 0);
  CHECK(ml_decide(0.0, HypothesisSet{1.0, {0.0, 5.0}, std::nullopt}, 10) == 0);
  CHECK_THROWS_AS(ml_decide(1.0, h, 0), std::invalid_argument);
  CHECK_THROWS_AS(ml_decide(-0.1, h, 10), std::invalid_argument);
  CHECK_THROWS(ml_decide(1.0, HypothesisSet{1.0, {}, std::nullopt}, 10));
  CHECK_THROWS(HypothesisSet{1.0, {0.0, 1.0, 0.5}, std::nullopt}.validate());
  CHECK_THROWS(HypothesisSet{-1.0, {0.0}, std::nullopt}.validate());
  // Coincident levels: tie goes to the lower index.
  const HypothesisSet twin{1.0, {0.0, 1.0, 1.0}, std::nullopt};
  twin.validate(true);
  CHECK(ml_decide(2.0, twin, 50) == 1);
}

TEST_CASE("decision regions partition the energy axis") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto r = decision_regions(h, n);
    REQUIRE(!r.empty());
    CHECK(r.front().lower == 0.0);
    CHECK(std::isinf(r.back().upper));
    for (std::size_t i = 1; i < r.size(); ++i) CHECK(r[i].lower == r[i - 1].upper);
    for (const auto& reg : r) {
      if (std::isinf(reg.upper)) continue;
      const double mid = 0.5 * (reg.lower + reg.upper);
      CHECK(ml_decide(mid, h, n) == reg.level);
    }
  }
}

TEST_CASE("binary detector matches the Q-function oracle") {
  // Gaussian approximation: E ~ N(m, m^2 / n).
  const HypothesisSet h{1.0, {0.0, 1.0}, std::nullopt};
  for (std::size_t n : {10u, 50u, 100u, 500u}) {
    const double m0 = 1.0, m1 = 2.0;
    const double v0 = m0 * m0 / n, v1 = m1 * m1 / n;
    const double tau = oracle::gaussian_crossing(m0, v0, m1, v1);
    const double pfa = oracle::q_function((tau - m0) / std::sqrt(v0));
    const double pd = oracle::q_function((tau - m1) / std::sqrt(v1));
    const auto g = theoretical_metrics(h, n, {StatisticModel::gaussian, std::nullopt});
    CHECK(g.p_false_alarm == doctest::Approx(pfa).epsilon(1e-6));
    CHECK(*g.p_detection == doctest::Approx(pd).epsilon(1e-6));

    // Exact law: n E / m ~ Gamma(n, 1).
    const double pfa_exact = boost::math::gamma_q(static_cast<double>(n), n * tau / m0);
    const double pd_exact = boost::math::gamma_q(static_cast<double>(n), n * tau / m1);
    const auto x = theoretical_metrics(h, n);
    CHECK(x.p_false_alarm == doctest::Approx(pfa_exact).epsilon(1e-6));
    CHECK(*x.p_detection == doctest::Approx(pd_exact).epsilon(1e-6));
  }
}

TEST_CASE("ml_decide confusion under Gaussian statistics matches the Q-function form") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  const std::size_t n = 50;
  const std::size_t trials = 100'000;
  Rng rng(2024);
  const auto theory = theoretical_metrics(h, n, {StatisticModel::gaussian, std::nullopt});
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double m = h.mean(i);
    std::normal_distribution<double> draw(m, m / std::sqrt(static_cast<double>(n)));
    std::vector<double> row(h.size(), 0.0);
    for (std::size_t t = 0; t < trials; ++t) {
      const double e = std::max(0.0, draw(rng));
      row[ml_decide(e, h, n)] += 1.0 / trials;
    }
    for (std::size_t j = 0; j < h.size(); ++j) CHECK(std::abs(row[j] - theory.confusion[i][j]) < 0.01);
  }
}

TEST_CASE("exact-law metrics match a simulation of averaged energy") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  Rng rng(77);
  for (std::size_t n : {10u, 500u}) {
    const auto theory = theoretical_metrics(h, n);
    for (std::size_t i = 0; i < h.size(); ++i) {
      std::gamma_distribution<double> g(static_cast<double>(n), h.mean(i) / n);
      std::vector<double> row(h.size(), 0.0);
      for (int t = 0; t < 100'000; ++t) row[ml_decide(g(rng), h, n)] += 1e-5;
      for (std::size_t j = 0; j < h.size(); ++j) CHECK(std::abs(row[j] - theory.confusion[i][j]) < 0.01);
    }
  }
}

TEST_CASE("metric curves") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  const auto curve = metric_curve(h, {10, 100, 1000, 10000});
  CHECK(curve.pd_non_decreasing);
  CHECK(curve.pdisc_non_decreasing);
  CHECK(curve.pdisc_below_pd);
  CHECK(*curve.points.back().p_discrimination > 0.999);
  CHECK(curve.points.back().p_false_alarm < 1e-6);
  CHECK_THROWS(metric_curve(h, {}));
  CHECK_THROWS(metric_curve(h, {100, 10}));

  const auto idle_only = theoretical_metrics(HypothesisSet{1.0, {0.0}, std::nullopt}, 100);
  CHECK_FALSE(idle_only.p_detection.has_value());
  CHECK_FALSE(idle_only.p_discrimination.has_value());
  CHECK(idle_only.p_false_alarm == 0.0);

  HypothesisSet twin{1.0, {0.0, 1.0, 1.0}, std::nullopt};
  for (std::size_t n : {10u, 1000u, 100000u}) CHECK(*theoretical_metrics(twin, n).p_discrimination <= 0.5 + 1e-12);

  for (const auto& p : curve.points) {
    double s = 0.0;
    for (double v : p.confusion[0]) s += v;
    CHECK(s == doctest::Approx(1.0));
  }
}

TEST_CASE("fixed false-alarm mode") {
  const HypothesisSet h{1.0, {0.0, 0.5, 1.0}, std::nullopt};
  for (std::size_t n : {10u, 100u, 1000u}) {
    const auto m = theoretical_metrics(h, n, {StatisticModel::exact_gamma, 0.05});
    CHECK(m.p_false_alarm == doctest::Approx(0.05).epsilon(1e-6));
    const double thr = idle_threshold_for_pfa(h, n, 0.05, StatisticModel::exact_gamma);
    CHECK(energy_cdf(thr, h, 0, n, StatisticModel::exact_gamma) == doctest::Approx(0.95));
    CHECK(threshold_decide(thr * 0.999, h, n, thr) == 0);
    CHECK(threshold_decide(thr * 1.001, h, n, thr) >= 1);
  }
  CHECK_THROWS(idle_threshold_for_pfa(h, 10, 1.5, StatisticModel::exact_gamma));
}

TEST_CASE("priors shift decisions toward the likelier level") {
  HypothesisSet h{1.0, {0.0, 1.0}, std::nullopt};
  const double e = 1.45;
  const std::size_t base = ml_decide(e, h, 20);
  h.priors = std::vector<double>{0.01, 0.99};
  CHECK(ml_decide(e, h, 20) >= base);
  CHECK(ml_decide(e, h, 20) == 1);
}
