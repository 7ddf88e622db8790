#pragma once

// Two-tone temporal discrimination task.
//
//            Start       Wait              Short / Long
//   Init     -> Tone     -> Init           wrong
//   Tone 1   wrong       -> Interval/Tone  wrong
//   Interval wrong       -> Interval/Tone  wrong
//   Tone 2   wrong       -> Tone 2         correct iff the choice matches the interval
//
// Every episode is cut off at max_episode_steps with the wrong-answer reward.

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tperc/ou_process.hpp"

namespace tperc {

enum class Action : int { Start = 0, Wait = 1, Short = 2, Long = 3 };
inline constexpr std::size_t kActionCount = 4;

enum class Phase : int { Init = 0, Tone = 1, Interval = 2, Terminal = 3 };

std::string_view to_string(Action a);
std::string_view to_string(Phase p);

struct TaskConfig {
  double dt = 0.3;  // seconds per timestep
  int max_interval_steps = 10;
  int boundary_steps = 5;  // intervals <= boundary are Short
  double reward_correct = 1.0;
  double reward_wrong = -1.0;
  int sensor_channels = 15;
  int samples_per_step = 5;
  OUHyperparams true_ou_params{0.65, 0.45};
  int max_episode_steps = 30;

  void validate() const;
  double seconds(int steps) const noexcept { return dt * steps; }
};

struct EnvState {
  Phase phase = Phase::Init;
  std::optional<int> steps_since_first_tone;
  int true_interval_steps = 1;
  int tones_heard = 0;
  int steps = 0;                  // actions taken so far this episode
  std::uint64_t sensor_seed = 0;  // drives the OU generator for this episode
};

struct StepOutcome {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  // samples_per_step rows per channel when the step falls between the tones.
  std::vector<Eigen::VectorXd> sensor_slice;
};

// Fair coin for Short/Long, then uniform within the category.
EnvState reset(const TaskConfig& cfg, std::uint64_t seed);

StepOutcome step(const EnvState& state, Action action, const TaskConfig& cfg);

// Full interval recording of an episode: channels x (samples_per_step * k).
SensorBatch interval_recording(const EnvState& state, const TaskConfig& cfg);

// Concatenates the slices emitted between the tones. Times are spaced
// dt / samples_per_step starting at 0.
SensorBatch collect_interval_batch(std::span<const StepOutcome> history, const TaskConfig& cfg);

struct ScoredStep {
  Phase phase;       // phase the action was taken in
  int tones_heard;   // before the action
  Action action;
};

// 0 no Start; 1 Start; 2 waited after the first tone; 3 reached the second tone; 4 correct.
int score_points(std::span<const ScoredStep> steps, bool correct);

}  // namespace tperc
