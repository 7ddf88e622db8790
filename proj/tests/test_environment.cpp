#include <cmath>
#include <random>

#include "doctest.h"
#include "tperc/environment.hpp"
#include "tperc/errors.hpp"
#include "tperc/time_estimator.hpp"

using namespace tperc;

namespace {

EnvState with_interval(int k, const TaskConfig& cfg, std::uint64_t seed = 1) {
  EnvState s = reset(cfg, seed);
  s.true_interval_steps = k;
  return s;
}

// Start, then Wait until the second tone. Returns every outcome.
std::vector<StepOutcome> play_to_second_tone(EnvState s, const TaskConfig& cfg) {
  std::vector<StepOutcome> out;
  out.push_back(step(s, Action::Start, cfg));
  while (out.back().next_state.tones_heard < 2) out.push_back(step(out.back().next_state, Action::Wait, cfg));
  return out;
}

}  // namespace

TEST_CASE("reset draws short and long with equal probability") {
  TaskConfig cfg;
  cfg.max_interval_steps = 8;
  cfg.boundary_steps = 4;
  int shorts = 0;
  const int n = 10000;
  for (int seed = 0; seed < n; ++seed) {
    const auto s = reset(cfg, static_cast<std::uint64_t>(seed));
    CHECK(s.phase == Phase::Init);
    CHECK(s.tones_heard == 0);
    CHECK(!s.steps_since_first_tone);
    REQUIRE(s.true_interval_steps >= 1);
    REQUIRE(s.true_interval_steps <= 8);
    if (s.true_interval_steps <= 4) ++shorts;
  }
  CHECK(std::abs(shorts - n / 2) < 3 * std::sqrt(n * 0.25));
}

TEST_CASE("smallest task draws 1 and 2 evenly") {
  TaskConfig cfg;
  cfg.max_interval_steps = 2;
  cfg.boundary_steps = 1;
  int ones = 0;
  const int n = 4000;
  for (int seed = 0; seed < n; ++seed) {
    const int k = reset(cfg, static_cast<std::uint64_t>(seed) * 7919).true_interval_steps;
    REQUIRE((k == 1 || k == 2));
    ones += k == 1;
  }
  CHECK(std::abs(ones - n / 2) < 3 * std::sqrt(n * 0.25));
}

TEST_CASE("reset is deterministic") {
  TaskConfig cfg;
  const auto a = reset(cfg, 555), b = reset(cfg, 555);
  CHECK(a.true_interval_steps == b.true_interval_steps);
  CHECK(a.sensor_seed == b.sensor_seed);
}

TEST_CASE("Init row of the task table") {
  TaskConfig cfg;
  const auto s = reset(cfg, 1);
  auto o = step(s, Action::Start, cfg);
  CHECK(o.next_state.phase == Phase::Tone);
  CHECK(o.next_state.tones_heard == 1);
  CHECK(o.reward == 0.0);
  CHECK(!o.done);
  o = step(s, Action::Wait, cfg);
  CHECK(o.next_state.phase == Phase::Init);
  CHECK(o.reward == 0.0);
  for (auto a : {Action::Short, Action::Long}) {
    o = step(s, a, cfg);
    CHECK(o.done);
    CHECK(o.next_state.phase == Phase::Terminal);
    CHECK(o.reward == cfg.reward_wrong);
  }
}

TEST_CASE("exhaustive phase x action table") {
  TaskConfig cfg;
  for (int k = 1; k <= cfg.max_interval_steps; ++k) {
    const auto s0 = with_interval(k, cfg);
    const auto trace = play_to_second_tone(s0, cfg);
    REQUIRE(static_cast<int>(trace.size()) == k + 1);
    // Every state before the second tone: anything but Wait loses.
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
      const auto& s = trace[i].next_state;
      CHECK(s.tones_heard == 1);
      CHECK((s.phase == Phase::Tone || s.phase == Phase::Interval));
      CHECK(s.phase == (i == 0 ? Phase::Tone : Phase::Interval));
      for (auto a : {Action::Start, Action::Short, Action::Long}) {
        const auto o = step(s, a, cfg);
        CHECK(o.done);
        CHECK(o.reward == cfg.reward_wrong);
        CHECK(o.sensor_slice.empty());
      }
    }
    const auto& tone2 = trace.back().next_state;
    CHECK(tone2.phase == Phase::Tone);
    CHECK(tone2.tones_heard == 2);
    CHECK(*tone2.steps_since_first_tone == k);
    const bool is_short = k <= cfg.boundary_steps;
    CHECK(step(tone2, Action::Short, cfg).reward == (is_short ? cfg.reward_correct : cfg.reward_wrong));
    CHECK(step(tone2, Action::Long, cfg).reward == (is_short ? cfg.reward_wrong : cfg.reward_correct));
    CHECK(step(tone2, Action::Start, cfg).reward == cfg.reward_wrong);
    const auto w = step(tone2, Action::Wait, cfg);
    CHECK(!w.done);
    CHECK(w.next_state.phase == Phase::Tone);
    CHECK(w.sensor_slice.empty());
  }
}

TEST_CASE("a short interval classified Short is rewarded") {
  TaskConfig cfg;
  cfg.max_interval_steps = 8;
  cfg.boundary_steps = 4;
  const auto tone2 = play_to_second_tone(with_interval(3, cfg), cfg).back().next_state;
  CHECK(step(tone2, Action::Short, cfg).reward == cfg.reward_correct);
}

TEST_CASE("waiting after the second tone times out with the wrong reward") {
  TaskConfig cfg;
  auto s = play_to_second_tone(with_interval(2, cfg), cfg).back().next_state;
  StepOutcome o;
  do {
    o = step(s, Action::Wait, cfg);
    s = o.next_state;
  } while (!o.done);
  CHECK(s.steps == cfg.max_episode_steps);
  CHECK(o.reward == cfg.reward_wrong);
  CHECK_THROWS_AS(step(s, Action::Wait, cfg), ContractError);
}

TEST_CASE("random play terminates with at most one non-zero reward") {
  TaskConfig cfg;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> act(0, 3);
  for (int ep = 0; ep < 2000; ++ep) {
    auto s = reset(cfg, rng());
    int steps = 0, nonzero = 0;
    bool started = false;
    double total = 0.0;
    for (;;) {
      const auto a = static_cast<Action>(act(rng));
      if (s.phase == Phase::Init && a == Action::Start) started = true;
      const bool between = s.tones_heard == 1;
      const auto o = step(s, a, cfg);
      // Sensor samples only appear while waiting between the tones.
      if (!o.sensor_slice.empty()) CHECK((between && a == Action::Wait));
      if (between && a == Action::Wait) CHECK(!o.sensor_slice.empty());
      ++steps;
      if (o.reward != 0.0) ++nonzero, total += o.reward;
      CHECK(o.next_state.steps_since_first_tone.has_value() ==
            (o.next_state.tones_heard >= 1 && o.next_state.phase != Phase::Terminal));
      s = o.next_state;
      if (o.done) break;
      REQUIRE(steps < cfg.max_episode_steps);
    }
    CHECK(steps <= cfg.max_episode_steps);
    CHECK(nonzero == 1);
    if (started) CHECK((total == cfg.reward_wrong || total == cfg.reward_correct));
    else CHECK(total == cfg.reward_wrong);
  }
}

TEST_CASE("collected batch shape and consistency with the recording") {
  TaskConfig cfg;
  const int k = 7;
  const auto s0 = with_interval(k, cfg, 21);
  const auto trace = play_to_second_tone(s0, cfg);
  const auto b = collect_interval_batch(trace, cfg);
  CHECK(b.channel_count() == 15);
  CHECK(b.sample_count() == static_cast<std::size_t>(5 * k));
  CHECK(b.sample_times[1] - b.sample_times[0] == doctest::Approx(cfg.dt / 5));
  const auto full = interval_recording(s0, cfg);
  for (std::size_t c = 0; c < 15; ++c) CHECK(b.channels[c] == full.channels[c]);
}

TEST_CASE("collect before the first tone is a contract error") {
  TaskConfig cfg;
  const auto s = reset(cfg, 2);
  std::vector<StepOutcome> none{step(s, Action::Wait, cfg)};
  CHECK_THROWS_AS(collect_interval_batch(none, cfg), ContractError);
}

TEST_CASE("collected batch refits the generator parameters") {
  TaskConfig cfg;
  cfg.max_interval_steps = 70;
  cfg.boundary_steps = 35;
  cfg.max_episode_steps = 80;
  const int k = 67;  // 20.1 s of sensing
  double el = 0.0, es = 0.0;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto b = collect_interval_batch(play_to_second_tone(with_interval(k, cfg, seed), cfg), cfg);
    const auto r = fit_hyperparams(b);
    el += std::abs(r.params.lambda - 0.65) / 3;
    es += std::abs(r.params.sigma - 0.45) / 3;
  }
  CHECK(el < 0.2);
  CHECK(es < 0.2);
}

TEST_CASE("score_points ladder") {
  using S = ScoredStep;
  const S init_short{Phase::Init, 0, Action::Short};
  const S init_start{Phase::Init, 0, Action::Start};
  const S wait1{Phase::Tone, 1, Action::Wait};
  const S short1{Phase::Tone, 1, Action::Short};
  const S choose2{Phase::Tone, 2, Action::Long};

  CHECK(score_points(std::vector<S>{init_short}, false) == 0);
  CHECK(score_points(std::vector<S>{{Phase::Init, 0, Action::Wait}, init_short}, false) == 0);
  CHECK(score_points(std::vector<S>{init_start, short1}, false) == 1);
  CHECK(score_points(std::vector<S>{init_start, wait1, {Phase::Interval, 1, Action::Long}}, false) == 2);
  CHECK(score_points(std::vector<S>{init_start, wait1, choose2}, false) == 3);
  CHECK(score_points(std::vector<S>{init_start, wait1, choose2}, true) == 4);
}

TEST_CASE("task config validation") {
  TaskConfig c;
  c.boundary_steps = c.max_interval_steps;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.dt = 0.0;
  CHECK_THROWS_AS(c.validate(), ContractError);
  c = {};
  c.reward_wrong = INFINITY;
  CHECK_THROWS_AS(c.validate(), ContractError);
  CHECK_NOTHROW(TaskConfig{}.validate());
}
