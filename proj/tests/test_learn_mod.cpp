#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "cogniscope/dpgmm.hpp"
#include "cogniscope/learn_mod.hpp"
#include "cogniscope/linalg.hpp"
#include "oracles.hpp"

using namespace cogniscope;

namespace {

std::vector<std::vector<double>> cloud(const std::vector<double>& mean, double sd, std::size_t n, Rng& rng) {
  std::normal_distribution<double> g(0.0, sd);
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto v = mean;
    for (double& x : v) x += g(rng);
    out.push_back(v);
  }
  return out;
}

DPGMMConfig quick(std::uint64_t seed) {
  DPGMMConfig c;
  c.n_sweeps = 60;
  c.burn_in = 20;
  c.seed = seed;
  return c;
}

MixtureComponent comp(double weight, std::vector<double> mean) {
  MixtureComponent c;
  c.weight = weight;
  c.mean = std::move(mean);
  c.covariance = SquareMatrix::identity(3);
  c.cholesky = SquareMatrix::identity(3);
  return c;
}

}  // namespace

TEST_CASE("linear algebra helpers") {
  SquareMatrix m(2);
  m(0, 0) = 4.0;
  m(0, 1) = m(1, 0) = 2.0;
  m(1, 1) = 3.0;
  const auto l = cholesky(m);
  REQUIRE(l);
  CHECK((*l)(0, 0) == doctest::Approx(2.0));
  CHECK((*l)(1, 0) == doctest::Approx(1.0));
  CHECK((*l)(1, 1) == doctest::Approx(std::sqrt(2.0)));
  CHECK(log_det_from_cholesky(*l) == doctest::Approx(std::log(8.0)));
  // v' M^-1 v with M^-1 = [3 -2; -2 4] / 8
  CHECK(mahalanobis_sq(*l, {1.0, 1.0}) == doctest::Approx(3.0 / 8.0));
  CHECK(log_multigamma(2.5, 1) == doctest::Approx(std::lgamma(2.5)));
  CHECK(log_multigamma(3.0, 2) ==
        doctest::Approx(0.5 * std::log(std::numbers::pi) + std::lgamma(3.0) + std::lgamma(2.5)));
  SquareMatrix bad(2);
  bad(0, 0) = 1.0;
  bad(1, 1) = -1.0;
  CHECK_FALSE(cholesky(bad));
}

TEST_CASE("one tight cloud gives one dominant component") {
  Rng rng(1);
  const auto x = cloud({1.0, 0.0, 0.0}, 0.05, 300, rng);
  const auto m = dpgmm_fit(x, quick(1));
  REQUIRE(!m.components.empty());
  CHECK(m.components[0].weight >= 0.95);
  CHECK(m.dominant().size() == 1);
}

TEST_CASE("two clouds six sigma apart") {
  Rng rng(2);
  auto x = cloud({0.0, 0.0, 0.0}, 1.0, 300, rng);
  const auto y = cloud({6.0, 0.0, 0.0}, 1.0, 300, rng);
  x.insert(x.end(), y.begin(), y.end());
  const auto m = dpgmm_fit(x, quick(2));
  const auto dom = m.dominant();
  REQUIRE(dom.size() == 2);
  std::vector<double> first;
  for (auto k : dom) first.push_back(m.components[k].mean[0]);
  std::sort(first.begin(), first.end());
  CHECK(std::abs(first[0] - 0.0) < 0.5);
  CHECK(std::abs(first[1] - 6.0) < 0.5);
  for (std::size_t i = 1; i < m.components.size(); ++i) CHECK(m.components[i - 1].count >= m.components[i].count);
  double w = 0.0;
  for (const auto& c : m.components) w += c.weight;
  CHECK(w == doctest::Approx(1.0));
}

TEST_CASE("warm-started update when the first point sits in a small component") {
  Rng rng(12);
  auto x = cloud({6.0, 0.0, 0.0}, 0.5, 30, rng);
  const auto big = cloud({0.0, 0.0, 0.0}, 0.5, 300, rng);
  x.insert(x.end(), big.begin(), big.end());
  const auto m = dpgmm_fit(x, quick(12));
  REQUIRE(m.assignments.front() != 0);
  const auto more = cloud({0.0, 0.0, 0.0}, 0.5, 20, rng);
  const auto u = dpgmm_update(m, more, quick(13));
  CHECK(u.data.size() == 350);
  CHECK(u.dominant().size() == 2);
}

TEST_CASE("partition posterior is exchangeable") {
  Rng rng(3);
  auto x = cloud({0.0, 0.0}, 1.0, 40, rng);
  const NiwPrior prior{{0.0, 0.0}, 0.01, 4.0, SquareMatrix::identity(2, 0.5)};
  std::vector<std::size_t> z(x.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = i % 3;
  const double base = partition_log_posterior(x, z, prior, 1.0);

  // Permuting data together with labels leaves the joint unchanged.
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::vector<double>> xp;
  std::vector<std::size_t> zp;
  for (auto i : perm) {
    xp.push_back(x[i]);
    zp.push_back(z[i]);
  }
  CHECK(partition_log_posterior(xp, zp, prior, 1.0) == doctest::Approx(base).epsilon(1e-12));

  // Renaming clusters changes nothing either.
  std::vector<std::size_t> renamed = z;
  for (auto& k : renamed) k = 2 - k;
  CHECK(partition_log_posterior(x, renamed, prior, 1.0) == doctest::Approx(base).epsilon(1e-12));

  // CRP part with one cluster of n and one of 1 versus two singletons.
  std::vector<std::vector<double>> two{{0.0, 0.0}, {0.0, 0.0}};
  const double together = partition_log_posterior(two, {0, 0}, prior, 1.0);
  const double apart = partition_log_posterior(two, {0, 1}, prior, 1.0);
  CHECK(together > apart);
}

TEST_CASE("dpgmm input checks") {
  Rng rng(4);
  CHECK_THROWS_AS(dpgmm_fit(cloud({0.0}, 1.0, 9, rng), quick(1)), std::invalid_argument);
  auto bad = quick(1);
  bad.burn_in = bad.n_sweeps;
  CHECK_THROWS_AS(dpgmm_fit(cloud({0.0}, 1.0, 50, rng), bad), std::invalid_argument);
  auto ragged = cloud({0.0, 0.0}, 1.0, 20, rng);
  ragged[5].pop_back();
  CHECK_THROWS_AS(dpgmm_fit(ragged, quick(1)), std::invalid_argument);
}

TEST_CASE("fits are reproducible from the seed") {
  Rng rng(5);
  const auto x = cloud({1.0, 2.0, 3.0}, 0.3, 100, rng);
  const auto a = dpgmm_fit(x, quick(9));
  const auto b = dpgmm_fit(x, quick(9));
  CHECK(a.assignments == b.assignments);
  CHECK(a.mode_log_posterior == b.mode_log_posterior);
}

TEST_CASE("noise identification") {
  MixtureModel m;
  m.dim = 3;
  m.components = {comp(0.5, {5.0, -8.0, -8.0}), comp(0.5, {1.0, 0.0, 0.0})};
  const auto n = identify_noise_component(m);
  REQUIRE(n.idle_observed());
  CHECK(*n.component_id == 1);
  CHECK(n.noise_variance == doctest::Approx(1.0));

  m.components = {comp(0.5, {5.0, -8.0, -8.0}), comp(0.5, {3.0, -2.0, -2.0})};
  CHECK_FALSE(identify_noise_component(m).idle_observed());

  // A tiny component does not count.
  m.components = {comp(0.99, {5.0, -8.0, -8.0}), comp(0.01, {1.0, 0.0, 0.0})};
  CHECK_FALSE(identify_noise_component(m).idle_observed());
}

TEST_CASE("dictionary matching against theoretical signatures") {
  const double s2 = 1.0;
  MixtureModel m;
  m.dim = 3;
  const double pb = 2.0, pq = 3.0, p8 = 1.5, p16 = 4.0;
  auto sig = [&](const std::vector<oracle::cplx>& pts, double p) {
    const auto c = oracle::enumerate(pts, p, s2);
    return std::vector<double>{c.c21, c.c40, c.c42};
  };
  m.components = {comp(0.2, sig(oracle::bpsk(), pb)), comp(0.2, sig(oracle::qpsk(), pq)),
                  comp(0.2, sig(oracle::psk8(), p8)), comp(0.2, sig(oracle::qam16(), p16)),
                  comp(0.2, {s2, 0.0, 0.0})};
  const auto noise = identify_noise_component(m);
  REQUIRE(noise.component_id == std::optional<std::size_t>(4));
  const auto match = match_patterns(m, ModulationDictionary::standard(), noise.noise_variance, noise.component_id);
  REQUIRE(match.assignments.size() == 4);
  const std::vector<std::pair<ModulationType, double>> want{
      {ModulationType::BPSK, pb}, {ModulationType::QPSK, pq}, {ModulationType::PSK8, p8}, {ModulationType::QAM16, p16}};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(*match.assignments[i].component_id == i);
    CHECK(match.assignments[i].modulation == want[i].first);
    CHECK(match.assignments[i].estimated_power == doctest::Approx(want[i].second));
    CHECK(match.assignments[i].residual == doctest::Approx(0.0).scale(1.0));
  }
  CHECK(match.dictionary.active_count() == 4);

  // Only BPSK present: the rest of the dictionary is pruned.
  MixtureModel only;
  only.dim = 3;
  only.components = {comp(1.0, sig(oracle::bpsk(), pb))};
  const auto pruned = match_patterns(only, ModulationDictionary::standard(), s2);
  CHECK(pruned.dictionary.active_count() == 1);
  CHECK(pruned.assignments[0].modulation == ModulationType::BPSK);
}

TEST_CASE("classification, unknown patterns and posterior updates") {
  Rng rng(6);
  const double s2 = 1.0;
  std::vector<CumulantVector> train;
  std::vector<cplx> buf(100);
  const auto qpsk = TransmitPattern::make(ModulationType::QPSK, 8.0);
  for (int i = 0; i < 150; ++i) {
    for (const auto& pat : {TransmitPattern::idle(), qpsk}) {
      synthesize_samples(pat, s2, buf, rng);
      auto v = estimate_cumulants(buf);
      v.truth_label = pat;
      train.push_back(v);
    }
  }
  DPGMMConfig cfg = quick(3);
  const auto model = fit_patterns(train, cfg);
  REQUIRE(model.dominant().size() == 2);
  const auto noise = identify_noise_component(model);
  REQUIRE(noise.idle_observed());
  CHECK(noise.noise_variance == doctest::Approx(1.0).epsilon(0.1));
  const auto match = match_patterns(model, ModulationDictionary::standard(), noise.noise_variance, noise.component_id);
  REQUIRE(match.assignments.size() == 1);
  CHECK(match.assignments[0].modulation == ModulationType::QPSK);

  // A component mean classifies as that component.
  for (std::size_t k : model.dominant()) {
    CumulantVector v;
    std::copy(model.components[k].mean.begin(), model.components[k].mean.end(), v.values.begin());
    const auto a = classify_vector(model, match.assignments, v, noise.component_id);
    CHECK_FALSE(a.unknown);
    CHECK(a.component_id == k);
  }

  // Far outside everything: unknown.
  CumulantVector far;
  far.values = {500.0, 4000.0, -9000.0};
  CHECK(classify_vector(model, match.assignments, far, noise.component_id).unknown);

  // Empty update is the identity.
  const auto same = update_posterior(model, {}, cfg);
  CHECK(same.assignments == model.assignments);

  // Points at an existing mean: no new component, weight moves toward it.
  std::vector<CumulantVector> dup(60);
  const auto& top = model.components[match.assignments[0].component_id.value()];
  for (auto& v : dup) std::copy(top.mean.begin(), top.mean.end(), v.values.begin());
  const auto grown = update_posterior(model, dup, cfg);
  CHECK(grown.dominant().size() == 2);
  CHECK(grown.components[0].weight > top.weight);

  // A distant cloud brings exactly one new dominant component.
  std::vector<CumulantVector> novel;
  const auto bpsk = TransmitPattern::make(ModulationType::BPSK, 20.0);
  for (int i = 0; i < 100; ++i) {
    synthesize_samples(bpsk, s2, buf, rng);
    novel.push_back(estimate_cumulants(buf));
  }
  const auto extended = update_posterior(model, novel, cfg);
  CHECK(extended.dominant().size() == 3);
}

TEST_CASE("mixture save/load round trip") {
  Rng rng(7);
  auto x = cloud({0.0, 0.0, 0.0}, 1.0, 100, rng);
  const auto y = cloud({8.0, 1.0, 0.0}, 1.0, 100, rng);
  x.insert(x.end(), y.begin(), y.end());
  const auto m = dpgmm_fit(x, quick(4));
  std::stringstream s;
  save_mixture(m, s);
  const auto back = load_mixture(s);
  CHECK(back.assignments == m.assignments);
  REQUIRE(back.components.size() == m.components.size());
  for (std::size_t k = 0; k < m.components.size(); ++k)
    for (std::size_t d = 0; d < 3; ++d)
      CHECK(back.components[k].mean[d] == doctest::Approx(m.components[k].mean[d]).epsilon(1e-12));
  const auto a = predictive_scores(m, {1.0, 1.0, 1.0});
  const auto b = predictive_scores(back, {1.0, 1.0, 1.0});
  CHECK(a.log_new == doctest::Approx(b.log_new));
  std::stringstream junk("{\"format\": \"other\"}");
  CHECK_THROWS(load_mixture(junk));
}
