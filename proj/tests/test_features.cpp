#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tperc/errors.hpp"
#include "tperc/features.hpp"

using namespace tperc;

namespace {

const double kPeak = 1.0 / std::sqrt(2.0 * std::numbers::pi);

TraceState with_events(std::initializer_list<TraceEvent> ev) {
  TraceState s;
  s.events = ev;
  return s;
}

}  // namespace

TEST_CASE("trace height") {
  CHECK(trace_height(0, 0.9) == 1.0);
  CHECK(trace_height(10, 0.9) == doctest::Approx(0.36787944117144233).epsilon(1e-14));
  CHECK(trace_height(20, 0.9) == doctest::Approx(std::pow(trace_height(10, 0.9), 2)).epsilon(1e-14));
  CHECK_THROWS_AS(trace_height(-1, 0.9), ContractError);
}

TEST_CASE("basis values") {
  CHECK(basis(0.3, 0.3, 0.1) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(basis(0.4, 0.3, 0.1) == doctest::Approx(kPeak * std::exp(-0.5)).epsilon(1e-12));
  CHECK(basis(0.2, 0.3, 0.1) == doctest::Approx(kPeak * std::exp(-0.5)).epsilon(1e-12));
  const double d = 1.0 - 1.0 / 6.0;
  CHECK(basis(1.0, 1.0 / 6.0, 0.1) == doctest::Approx(kPeak * std::exp(-d * d / 0.02)).epsilon(1e-12));
}

TEST_CASE("no events gives the zero vector") {
  const MicrostimuliConfig cfg;
  const auto x = microstimuli_features({}, cfg);
  CHECK(x.size() == 18);
  CHECK(std::all_of(x.begin(), x.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("fresh event peaks in the last slot") {
  const MicrostimuliConfig cfg;
  const auto x = microstimuli_features(with_events({{1, 0}}), cfg);
  CHECK(x[5] == doctest::Approx(kPeak).epsilon(1e-15));
  CHECK(*std::max_element(x.begin(), x.end()) == x[5]);
  for (std::size_t i = 6; i < 18; ++i) CHECK(x[i] == 0.0);
}

TEST_CASE("event at age 5 matches a scalar evaluation") {
  const MicrostimuliConfig cfg;  // m=6, beta=0.1, xi=0.9
  const auto x = microstimuli_features(with_events({{2, 5}}), cfg);
  const double h = std::exp(-0.1 * 5.0);
  for (int j = 1; j <= 6; ++j) {
    const double c = j / 6.0;
    const double expected = h * kPeak * std::exp(-(h - c) * (h - c) / (2.0 * 0.01));
    CHECK(x[static_cast<std::size_t>(6 + j - 1)] == doctest::Approx(expected).epsilon(1e-13));
  }
  for (std::size_t i = 0; i < 6; ++i) CHECK(x[i] == 0.0);
  for (std::size_t i = 12; i < 18; ++i) CHECK(x[i] == 0.0);
}

TEST_CASE("too many events is a contract error") {
  MicrostimuliConfig cfg;
  cfg.zeta = 1;
  CHECK_THROWS_AS(microstimuli_features(with_events({{1, 0}, {2, 0}}), cfg), ContractError);
}

TEST_CASE("deploy_event") {
  auto s = deploy_event({}, 1, 3);
  REQUIRE(s.events.size() == 1);
  CHECK(s.events[0].age == 0);
  for (int i = 0; i < 7; ++i) s = tick(s);
  CHECK(s.clock == 7);
  s = deploy_event(s, 2, 3);
  CHECK(s.find(1)->age == 7);
  CHECK(s.find(2)->age == 0);
  CHECK_THROWS_AS(deploy_event(s, 2, 3), ContractError);
  s = deploy_event(s, 3, 3);
  CHECK_THROWS_AS(deploy_event(s, 4, 3), ContractError);
}

TEST_CASE("override_age") {
  const MicrostimuliConfig cfg;
  auto s = tick(tick(tick(deploy_event({}, 1, 3))));
  CHECK(microstimuli_features(override_age(s, 1, 3), cfg) == microstimuli_features(s, cfg));

  const auto aged = override_age(s, 1, 8);
  CHECK(microstimuli_features(aged, cfg) == microstimuli_features(with_events({{1, 8}}), cfg));
  CHECK(tick(aged).find(1)->age == 9);

  CHECK(microstimuli_features(override_age(s, 1, 0), cfg) == microstimuli_features(deploy_event({}, 1, 3), cfg));
  CHECK_THROWS_AS(override_age(s, 2, 1), ContractError);
  CHECK_THROWS_AS(override_age(s, 1, -1), ContractError);
}

TEST_CASE("tick commutes with feature evaluation") {
  const MicrostimuliConfig cfg;
  const auto s = with_events({{1, 4}, {2, 1}});
  CHECK(microstimuli_features(tick(s), cfg) == microstimuli_features(with_events({{1, 5}, {2, 2}}), cfg));
}

TEST_CASE("features stay within [0, 1/sqrt(2 pi)]") {
  const MicrostimuliConfig cfg;
  for (long age = 0; age <= 1000; ++age) {
    for (double v : microstimuli_features(with_events({{1, age}, {3, age / 2}}), cfg)) {
      CHECK(v >= 0.0);
      CHECK(v <= kPeak);
    }
  }
}

TEST_CASE("distinct ages give distinct feature blocks") {
  const MicrostimuliConfig cfg;
  std::vector<FeatureVector> blocks;
  for (long age = 0; age <= 50; ++age) blocks.push_back(microstimuli_features(with_events({{1, age}}), cfg));
  for (std::size_t a = 0; a < blocks.size(); ++a)
    for (std::size_t b = a + 1; b < blocks.size(); ++b) {
      double diff = 0.0;
      for (std::size_t i = 0; i < blocks[a].size(); ++i) diff = std::max(diff, std::abs(blocks[a][i] - blocks[b][i]));
      CHECK(diff > 1e-9);
    }
}

TEST_CASE("csc one-hot layout") {
  auto x = csc_features(with_events({{1, 0}}), 4, 3);
  CHECK(x.size() == 12);
  CHECK(x[0] == 1.0);
  CHECK(std::count(x.begin(), x.end(), 1.0) == 1);

  x = csc_features(with_events({{1, 4}}), 4, 3);
  CHECK(std::count(x.begin(), x.end(), 0.0) == 12);

  x = csc_features(with_events({{1, 2}, {2, 0}}), 4, 3);
  CHECK(std::count(x.begin(), x.end(), 1.0) == 2);
  CHECK(x[2] == 1.0);  // event 1, age 2
  CHECK(x[4] == 1.0);  // event 2, age 0
  CHECK_THROWS_AS(csc_features({}, 0, 3), ContractError);
}

TEST_CASE("csc has one active entry per young event") {
  for (long a1 = 0; a1 < 8; ++a1)
    for (long a2 = 0; a2 < 8; ++a2) {
      const auto x = csc_features(with_events({{1, a1}, {2, a2}}), 5, 3);
      const long expected = (a1 < 5) + (a2 < 5);
      CHECK(std::count(x.begin(), x.end(), 1.0) == expected);
    }
}

TEST_CASE("config validation") {
  MicrostimuliConfig c;
  c.xi = 1.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.beta = 0.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.m = 0;
  CHECK_THROWS_AS(c.validate(), ContractError);
}
