#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "tperc/errors.hpp"
#include "tperc/time_estimator.hpp"

using namespace tperc;

namespace {

SensorBatch synthetic(const OUHyperparams& p, double seconds, double dt, std::size_t m, std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::llround(seconds / dt));
  return sample_paths(p, SampleTimes::with_spacing(n, dt), m, seed);
}

// Candidate log-likelihood via explicit inverse, summed over channels.
double brute_profile(const SensorBatch& b, const OUHyperparams& p, double tau) {
  const auto t = oracle::uniform_times(b.sample_count(), tau);
  const auto k = oracle::ou_kernel(p.lambda, p.sigma, t);
  double total = 0.0;
  for (const auto& ch : b.channels) total += oracle::gaussian_loglik({ch.data(), ch.data() + ch.size()}, k);
  return total;
}

}  // namespace

TEST_CASE("fit recovers lambda = 0.65, sigma = 0.45 from 20 s") {
  double el = 0.0, es = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = fit_hyperparams(synthetic({0.65, 0.45}, 20.0, 0.1, 15, seed));
    CHECK(r.converged);
    el += std::abs(r.params.lambda - 0.65) / 3.0;
    es += std::abs(r.params.sigma - 0.45) / 3.0;
  }
  CHECK(el < 0.15);
  CHECK(es < 0.15);
}

TEST_CASE("fit recovers lambda = 0.3 from 10 s within 0.2") {
  double el = 0.0, es = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto r = fit_hyperparams(synthetic({0.3, 0.45}, 10.0, 0.1, 15, seed));
    el += std::abs(r.params.lambda - 0.3) / 3.0;
    es += std::abs(r.params.sigma - 0.45) / 3.0;
  }
  CHECK(el < 0.2);
  CHECK(es < 0.2);
}

TEST_CASE("fit never ends below its starting point") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto b = synthetic({1.2, 0.2}, 5.0, 0.1, 3, seed);
    FitConfig cfg;
    cfg.max_iters = 7;
    const auto r = fit_hyperparams(b, cfg);
    const double start = batch_log_likelihood(b, build_kernel({cfg.init_lambda, cfg.init_sigma}, b.sample_times));
    CHECK(r.log_likelihood >= start);
    CHECK(r.log_likelihood == doctest::Approx(batch_log_likelihood(b, build_kernel(r.params, b.sample_times))));
    CHECK(r.iterations <= 7);
  }
}

TEST_CASE("fit on all-zero channels drives sigma down and terminates") {
  SensorBatch b{{Eigen::VectorXd::Zero(40), Eigen::VectorXd::Zero(40)}, SampleTimes::with_spacing(40, 0.1)};
  const auto r = fit_hyperparams(b);
  CHECK(r.params.sigma < 0.5);
  CHECK(r.params.sigma >= kMinSigma);
  CHECK(r.params.lambda >= kMinLambda);
  CHECK(r.params.lambda <= kMaxLambda);
  CHECK(r.iterations <= FitConfig{}.max_iters);
}

TEST_CASE("fit reports a numerical error with the last valid iterate") {
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(10);
  bad(3) = std::nan("");
  SensorBatch b{{bad}, SampleTimes::with_spacing(10, 0.1)};
  try {
    fit_hyperparams(b);
    FAIL("expected FitNumericalError");
  } catch (const FitNumericalError& e) {
    CHECK(e.last_valid().params.lambda == doctest::Approx(0.5));
    CHECK(e.last_valid().params.sigma == doctest::Approx(0.5));
  }
}

TEST_CASE("fit config is validated") {
  const auto b = synthetic({0.65, 0.45}, 2.0, 0.1, 1, 1);
  FitConfig c;
  c.max_iters = 0;
  CHECK_THROWS_AS(fit_hyperparams(b, c), ContractError);
  c = {};
  c.step_tolerance = 0.0;
  CHECK_THROWS_AS(fit_hyperparams(b, c), ContractError);
}

TEST_CASE("tau grid construction") {
  const auto g = TauGrid::range(2.0, 2.0, 24.0);
  CHECK(g.size() == 12);
  CHECK(g.front() == 2.0);
  CHECK(g.back() == doctest::Approx(24.0));
  CHECK_THROWS_AS(TauGrid({}), ContractError);
  CHECK_THROWS_AS(TauGrid({1.0, 1.0}), ContractError);
  CHECK_THROWS_AS(TauGrid({0.0, 1.0}), ContractError);
}

TEST_CASE("singleton grid returns its candidate") {
  const auto b = synthetic({0.65, 0.45}, 3.0, 0.1, 2, 1);
  const auto e = estimate_tau(b, {0.65, 0.45}, TauGrid({7.5}));
  CHECK(e.tau_hat == 7.5);
  CHECK(e.profile.size() == 1);
}

TEST_CASE("profile covers the grid and tau_hat is maximal") {
  const auto b = synthetic({0.65, 0.45}, 5.0, 0.1, 4, 3);
  const auto g = TauGrid::range(1.0, 1.0, 10.0);
  const auto e = estimate_tau(b, {0.65, 0.45}, g);
  REQUIRE(e.profile.size() == g.size());
  double best = -INFINITY;
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(e.profile[i].first == g[i]);
    best = std::max(best, e.profile[i].second);
  }
  const auto it = std::find_if(e.profile.begin(), e.profile.end(), [&](auto& p) { return p.first == e.tau_hat; });
  REQUIRE(it != e.profile.end());
  CHECK(it->second == best);
  // smallest maximiser
  for (auto p = e.profile.begin(); p != it; ++p) CHECK(p->second < best);
}

TEST_CASE("estimate_tau argmax equals the explicit-inverse oracle") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lam(0.2, 1.5), sig(0.1, 0.8), span(0.5, 6.0);
  std::uniform_int_distribution<int> nn(2, 8), mm(1, 2);
  for (int rep = 0; rep < 50; ++rep) {
    const OUHyperparams p{lam(rng), sig(rng)};
    const auto n = static_cast<std::size_t>(nn(rng));
    const auto b = sample_paths(p, SampleTimes::uniform(n, span(rng)), static_cast<std::size_t>(mm(rng)), rng());
    std::vector<double> cands;
    double c = 0.0;
    std::uniform_real_distribution<double> inc(0.3, 2.0);
    for (int i = 0; i < 5; ++i) cands.push_back(c += inc(rng));
    const auto e = estimate_tau(b, p, TauGrid(cands));
    std::size_t arg = 0;
    double best = -INFINITY;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const double v = brute_profile(b, p, cands[i]);
      CHECK(e.profile[i].second == doctest::Approx(v).epsilon(1e-9));
      if (v > best) best = v, arg = i;
    }
    CHECK(e.tau_hat == cands[arg]);
  }
}

TEST_CASE("10 s recordings are estimated within 4 s on average") {
  const auto g = TauGrid::range(2.0, 2.0, 24.0);
  double sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = sample_paths({0.65, 0.45}, SampleTimes::uniform(101, 10.0), 15, seed);
    sum += estimate_tau(b, {0.65, 0.45}, g).tau_hat;
  }
  CHECK(std::abs(sum / 20.0 - 10.0) <= 4.0);
}

TEST_CASE("estimate_tau does not depend on channel order") {
  auto b = synthetic({0.65, 0.45}, 4.0, 0.1, 6, 12);
  const auto g = TauGrid::range(0.5, 0.5, 10.0);
  const auto a = estimate_tau(b, {0.65, 0.45}, g);
  std::mt19937_64 rng(1);
  std::shuffle(b.channels.begin(), b.channels.end(), rng);
  const auto c = estimate_tau(b, {0.65, 0.45}, g);
  CHECK(a.tau_hat == c.tau_hat);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(a.profile[i].second == doctest::Approx(c.profile[i].second).epsilon(1e-12));
}

TEST_CASE("subsample_channels") {
  const auto b = synthetic({0.65, 0.45}, 1.0, 0.1, 5, 2);
  const auto all = subsample_channels(b, 5, 9);
  REQUIRE(all.channel_count() == 5);
  for (std::size_t c = 0; c < 5; ++c) CHECK(all.channels[c] == b.channels[c]);
  CHECK(subsample_channels(b, 1, 9).channel_count() == 1);
  const auto x = subsample_channels(b, 3, 4);
  const auto y = subsample_channels(b, 3, 4);
  for (std::size_t c = 0; c < 3; ++c) CHECK(x.channels[c] == y.channels[c]);
  CHECK_THROWS_AS(subsample_channels(b, 0, 1), ContractError);
  CHECK_THROWS_AS(subsample_channels(b, 6, 1), ContractError);
}

TEST_CASE("15 of 365 channels keep most of the accuracy") {
  // Accuracy is 1 - mean relative error over matched seeds.
  const OUHyperparams p{0.65, 0.45};
  const auto g = TauGrid::range(2.0, 2.0, 24.0);
  double err_full = 0.0, err_sub = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto b = sample_paths(p, SampleTimes::uniform(101, 10.0), 365, seed);
    err_full += std::abs(estimate_tau(b, p, g).tau_hat - 10.0) / 10.0 / 20.0;
    err_sub += std::abs(estimate_tau(subsample_channels(b, 15, seed), p, g).tau_hat - 10.0) / 10.0 / 20.0;
  }
  MESSAGE("relative error full " << err_full << ", 15 channels " << err_sub);
  CHECK(1.0 - err_sub >= (1.0 - err_full) / 1.5);
}
