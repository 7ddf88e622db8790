#include "tperc/environment.hpp"

#include <cmath>
#include <random>
#include <string>

#include "tperc/errors.hpp"

namespace tperc {

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Start: return "Start";
    case Action::Wait: return "Wait";
    case Action::Short: return "Short";
    case Action::Long: return "Long";
  }
  return "?";
}

std::string_view to_string(Phase p) {
  switch (p) {
    case Phase::Init: return "Init";
    case Phase::Tone: return "Tone";
    case Phase::Interval: return "Interval";
    case Phase::Terminal: return "Terminal";
  }
  return "?";
}

void TaskConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ContractError("task dt must be > 0");
  if (boundary_steps < 1 || boundary_steps >= max_interval_steps)
    throw ContractError("task needs 1 <= boundary_steps < max_interval_steps");
  if (!std::isfinite(reward_correct) || !std::isfinite(reward_wrong))
    throw ContractError("task rewards must be finite");
  if (sensor_channels < 1) throw ContractError("task sensor_channels must be >= 1");
  if (samples_per_step < 2) throw ContractError("task samples_per_step must be >= 2");
  if (max_episode_steps < max_interval_steps + 2)
    throw ContractError("task max_episode_steps must leave room for a full trial");
  true_ou_params.validate();
}

EnvState reset(const TaskConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  const bool is_long = coin(rng) == 1;
  std::uniform_int_distribution<int> pick = is_long
      ? std::uniform_int_distribution<int>(cfg.boundary_steps + 1, cfg.max_interval_steps)
      : std::uniform_int_distribution<int>(1, cfg.boundary_steps);
  EnvState s;
  s.true_interval_steps = pick(rng);
  s.sensor_seed = rng();
  return s;
}

SensorBatch interval_recording(const EnvState& state, const TaskConfig& cfg) {
  const auto n = static_cast<std::size_t>(cfg.samples_per_step * state.true_interval_steps);
  const auto times = SampleTimes::with_spacing(n, cfg.dt / cfg.samples_per_step);
  return sample_paths(cfg.true_ou_params, times, static_cast<std::size_t>(cfg.sensor_channels),
                      state.sensor_seed);
}

namespace {

StepOutcome finish(EnvState next, double reward) {
  next.phase = Phase::Terminal;
  next.steps_since_first_tone.reset();
  StepOutcome out;
  out.next_state = next;
  out.reward = reward;
  out.done = true;
  return out;
}

bool is_choice(Action a) { return a == Action::Short || a == Action::Long; }

}  // namespace

StepOutcome step(const EnvState& state, Action action, const TaskConfig& cfg) {
  if (state.phase == Phase::Terminal) throw ContractError("cannot act in a terminal state");
  EnvState next = state;
  ++next.steps;

  StepOutcome out;
  switch (state.phase) {
    case Phase::Init:
      if (action == Action::Start) {
        next.phase = Phase::Tone;
        next.tones_heard = 1;
        next.steps_since_first_tone = 0;
      } else if (is_choice(action)) {
        return finish(next, cfg.reward_wrong);
      }
      break;

    case Phase::Tone:
    case Phase::Interval:
      if (state.tones_heard >= 2) {
        if (is_choice(action)) {
          const bool is_short = state.true_interval_steps <= cfg.boundary_steps;
          const bool correct = (action == Action::Short) == is_short;
          return finish(next, correct ? cfg.reward_correct : cfg.reward_wrong);
        }
        if (action == Action::Start) return finish(next, cfg.reward_wrong);
        next.steps_since_first_tone = *state.steps_since_first_tone + 1;
        break;
      }
      if (action != Action::Wait) return finish(next, cfg.reward_wrong);
      {
        const int elapsed = *state.steps_since_first_tone;
        next.steps_since_first_tone = elapsed + 1;
        if (elapsed + 1 >= state.true_interval_steps) {
          next.phase = Phase::Tone;
          next.tones_heard = 2;
        } else {
          next.phase = Phase::Interval;
        }
        const SensorBatch rec = interval_recording(state, cfg);
        const auto sps = static_cast<Eigen::Index>(cfg.samples_per_step);
        out.sensor_slice.reserve(rec.channels.size());
        for (const auto& ch : rec.channels) out.sensor_slice.emplace_back(ch.segment(elapsed * sps, sps));
      }
      break;

    case Phase::Terminal:
      break;
  }

  if (next.steps >= cfg.max_episode_steps) return finish(next, cfg.reward_wrong);
  out.next_state = next;
  return out;
}

SensorBatch collect_interval_batch(std::span<const StepOutcome> history, const TaskConfig& cfg) {
  bool heard_first = false;
  std::vector<std::vector<double>> cols;
  for (const auto& o : history) {
    if (o.next_state.tones_heard >= 1) heard_first = true;
    if (o.sensor_slice.empty()) continue;
    if (cols.empty()) cols.resize(o.sensor_slice.size());
    if (o.sensor_slice.size() != cols.size()) throw ContractError("sensor slices disagree on channel count");
    for (std::size_t c = 0; c < cols.size(); ++c)
      cols[c].insert(cols[c].end(), o.sensor_slice[c].begin(), o.sensor_slice[c].end());
  }
  if (!heard_first) throw ContractError("interval batch requested before the first tone");
  if (cols.empty() || cols.front().size() < 2)
    throw ContractError("interval batch needs at least two samples per channel");

  const std::size_t n = cols.front().size();
  SensorBatch batch{{}, SampleTimes::with_spacing(n, cfg.dt / cfg.samples_per_step)};
  batch.channels.reserve(cols.size());
  for (auto& c : cols) batch.channels.emplace_back(Eigen::Map<const Eigen::VectorXd>(c.data(), c.size()));
  return batch;
}

int score_points(std::span<const ScoredStep> steps, bool correct) {
  std::size_t i = 0;
  while (i < steps.size() && !(steps[i].phase == Phase::Init && steps[i].action == Action::Start)) ++i;
  if (i == steps.size()) return 0;
  ++i;
  if (i == steps.size() || steps[i].action != Action::Wait) return 1;
  bool reached_second = false;
  for (; i < steps.size(); ++i)
    if (steps[i].tones_heard >= 2) reached_second = true;
  if (!reached_second) return 2;
  return correct ? 4 : 3;
}

}  // namespace tperc
