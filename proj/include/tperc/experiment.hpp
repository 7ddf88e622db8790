#pragma once

// End-to-end loop: sense the interval, turn the estimate into subjective time,
// act with a TD(lambda) Q-learner, and summarise the run.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tperc/environment.hpp"
#include "tperc/features.hpp"
#include "tperc/td_agent.hpp"
#include "tperc/time_estimator.hpp"

namespace tperc {

enum class Representation { Microstimuli, Csc, Tabular, TabularHistory };

std::string_view to_string(Representation r);
std::optional<Representation> parse_representation(std::string_view s);

struct GridSpec {
  // Zero means "derive from the task": step dt/6 from dt/6 to 1.5x the longest interval.
  double start = 0.0;
  double step = 0.0;
  double stop = 0.0;

  TauGrid resolve(const TaskConfig& task) const;
};

struct AnalysisConfig {
  double epsilon_threshold = 0.01;  // psychometric window starts once epsilon drops below
  int convergence_window = 100;
  double convergence_points = 3.5;
  int tderror_window = 100;
};

struct RunConfig {
  int episodes = 7000;
  AgentParams agent;
  MicrostimuliConfig features;
  Representation representation = Representation::Microstimuli;
  int csc_horizon = 0;  // 0: task.max_episode_steps
  TaskConfig task;
  FitConfig fit;
  GridSpec tau_grid;
  double calibration_duration = 20.0;  // seconds of pre-run data for the fit
  double calibration_dt = 0.1;
  bool oracle_tau = false;
  std::uint64_t master_seed = 1;
  AnalysisConfig analysis;

  void validate() const;
  int resolved_csc_horizon() const { return csc_horizon > 0 ? csc_horizon : task.max_episode_steps; }
};

// splitmix64 finaliser
std::uint64_t mix64(std::uint64_t x);
std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index);

struct EpisodeLog {
  int index = 0;
  std::vector<ScoredStep> steps;
  std::vector<double> rewards;
  std::vector<double> deltas;
  int points = 0;
  int true_interval_steps = 0;
  std::optional<double> estimated_tau;
  std::optional<Action> classification;
  bool correct = false;
  bool clamped = false;
  double total_reward = 0.0;
  double delta_at_reward = 0.0;
  double epsilon_start = 0.0;
  double epsilon_end = 0.0;
};

// Everything that persists between episodes.
struct AgentState {
  QWeights weights{kActionCount, 1};
  QTable table{0, kActionCount};
  std::map<std::vector<int>, std::size_t> history_index;  // phase history -> tabular-history row
  double epsilon = 0.3;
};

// Hyperparameters and grid used to turn interval recordings into estimates.
struct EstimatorContext {
  OUHyperparams params;
  TauGrid grid{{1.0}};
  std::optional<FitResult> fit;
};

// Fits the OU hyperparameters on a calibration recording (skipped with oracle
// timing or a tabular agent).
EstimatorContext prepare_estimator(const RunConfig& cfg);
AgentState initial_agent(const RunConfig& cfg);

// Raised when the estimator fails inside an episode.
class EpisodeAbort : public std::runtime_error {
 public:
  EpisodeAbort(int episode, const std::string& what)
      : std::runtime_error("episode " + std::to_string(episode) + ": " + what), episode_(episode) {}
  int episode() const noexcept { return episode_; }

 private:
  int episode_;
};

EpisodeLog run_episode(const RunConfig& cfg, const EstimatorContext& est, AgentState& agent, int index);

struct PsychometricBin {
  double duration_s = 0.0;
  double p_long = 0.0;
  int count = 0;
};
using PsychometricCurve = std::vector<PsychometricBin>;

struct RunSummary {
  int episodes = 0;
  std::optional<int> convergence_episode;  // 1-based
  int analysis_start = 0;                  // 0-based index of the first analysed episode
  int misclassified_total = 0;
  std::optional<double> misclassified_mean_s;
  std::optional<double> misclassified_median_s;
  int clamped_estimates = 0;
  double final_epsilon = 0.0;
  std::optional<FitResult> fit;
};

struct RunResult {
  std::vector<EpisodeLog> logs;
  RunSummary summary;
  AgentState agent;
};

RunResult run_experiment(const RunConfig& cfg);

// First episode whose epsilon at start is below the threshold; logs.size() if none.
std::size_t analysis_start(const std::vector<EpisodeLog>& logs, double epsilon_threshold);

std::optional<int> convergence_episode(const std::vector<EpisodeLog>& logs, int window, double threshold);

// Bins classified episodes from `from` onward by true duration. Empty when none were classified.
PsychometricCurve psychometric(const std::vector<EpisodeLog>& logs, const TaskConfig& task, std::size_t from = 0);

// Pool-adjacent-violators fit of the p_long values, weighted by count.
std::vector<double> isotonic_fit(const PsychometricCurve& curve);

// Trailing moving average of |delta| at the reward step.
std::vector<std::pair<int, double>> td_error_trajectory(const std::vector<EpisodeLog>& logs, int window);

struct SweepConfig {
  OUHyperparams params{0.65, 0.45};
  double sample_dt = 0.1;
  int channels = 15;
  TauGrid grid = TauGrid::range(0.5, 0.5, 30.0);
  int jobs = 1;
};

struct SweepRow {
  double true_tau = 0.0;
  double mean_tau_hat = 0.0;
  double std_tau_hat = 0.0;
  std::vector<double> estimates;
};

std::vector<SweepRow> tau_accuracy_sweep(const SweepConfig& cfg, const std::vector<double>& true_intervals,
                                         const std::vector<std::uint64_t>& seeds);

}  // namespace tperc
