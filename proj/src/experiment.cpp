#include "tperc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <thread>

#include "tperc/errors.hpp"

namespace tperc {

std::string_view to_string(Representation r) {
  switch (r) {
    case Representation::Microstimuli: return "microstimuli";
    case Representation::Csc: return "csc";
    case Representation::Tabular: return "tabular";
    case Representation::TabularHistory: return "tabular-history";
  }
  return "?";
}

std::optional<Representation> parse_representation(std::string_view s) {
  for (auto r : {Representation::Microstimuli, Representation::Csc, Representation::Tabular,
                 Representation::TabularHistory})
    if (to_string(r) == s) return r;
  return std::nullopt;
}

TauGrid GridSpec::resolve(const TaskConfig& task) const {
  if (step > 0.0) return TauGrid::range(start > 0.0 ? start : step, step, stop);
  const double s = task.dt / 6.0;
  return TauGrid::range(s, s, 1.5 * task.seconds(task.max_interval_steps));
}

void RunConfig::validate() const {
  if (episodes < 1) throw ContractError("episodes must be >= 1");
  agent.validate();
  task.validate();
  fit.validate();
  if (representation == Representation::Microstimuli || representation == Representation::Csc) {
    features.validate();
    if (features.zeta < 2) throw ContractError("features.zeta must be >= 2 (two tones)");
  }
  if (csc_horizon < 0) throw ContractError("csc_horizon must be >= 0");
  if (!(calibration_duration > 0.0) || !(calibration_dt > 0.0) ||
      calibration_duration / calibration_dt < 2.0)
    throw ContractError("calibration needs at least two samples");
  if (analysis.convergence_window < 1 || analysis.tderror_window < 1)
    throw ContractError("analysis windows must be >= 1");
  tau_grid.resolve(task);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t episode_seed(std::uint64_t master_seed, std::uint64_t episode_index) {
  return mix64(master_seed + episode_index);
}

namespace {

constexpr std::uint64_t kCalibrationStream = 0xc0ffee;
constexpr std::uint64_t kWeightStream = 0x5eed5;

bool is_linear(Representation r) { return r == Representation::Microstimuli || r == Representation::Csc; }

std::size_t feature_dim(const RunConfig& cfg) {
  if (cfg.representation == Representation::Csc)
    return static_cast<std::size_t>(cfg.resolved_csc_horizon() * cfg.features.zeta);
  return static_cast<std::size_t>(cfg.features.dimension());
}

FeatureVector features_of(const RunConfig& cfg, const TraceState& tr) {
  if (cfg.representation == Representation::Csc)
    return csc_features(tr, cfg.resolved_csc_horizon(), cfg.features.zeta);
  return microstimuli_features(tr, cfg.features);
}

long tau_to_steps(double tau, double dt) { return static_cast<long>(std::floor(tau / dt + 0.5)); }

// Subjective elapsed time at the second tone, clamped into the grid.
struct InjectedTau {
  double tau;
  bool clamped;
};

InjectedTau perceive_interval(const RunConfig& cfg, const EstimatorContext& est, const EnvState& state,
                              std::span<const StepOutcome> history) {
  double tau;
  if (cfg.oracle_tau) {
    tau = cfg.task.seconds(state.true_interval_steps);
  } else {
    const SensorBatch batch = collect_interval_batch(history, cfg.task);
    tau = estimate_tau(batch, est.params, est.grid).tau_hat;
  }
  const double lo = est.grid.front();
  const double hi = est.grid.back();
  const bool clamped = tau <= lo || tau >= hi;
  return {std::clamp(tau, lo, hi), clamped};
}

void finish_log(EpisodeLog& log, const EnvState& final_state, const TaskConfig& task) {
  log.true_interval_steps = final_state.true_interval_steps;
  log.correct = log.total_reward == task.reward_correct && log.classification.has_value();
  log.points = score_points(log.steps, log.correct);
}

void record_step(EpisodeLog& log, const EnvState& s, Action a, const StepOutcome& out, double delta) {
  log.steps.push_back({s.phase, s.tones_heard, a});
  log.rewards.push_back(out.reward);
  log.deltas.push_back(delta);
  if (s.tones_heard >= 2 && (a == Action::Short || a == Action::Long)) log.classification = a;
  if (out.done) {
    log.total_reward = out.reward;
    log.delta_at_reward = delta;
  }
}

EpisodeLog run_linear_episode(const RunConfig& cfg, const EstimatorContext& est, AgentState& agent,
                              int index, std::mt19937_64& explore, EnvState env) {
  EpisodeLog log;
  log.index = index;
  log.epsilon_start = agent.epsilon;
  const int zeta = cfg.features.zeta;

  EligibilityTraces traces(kActionCount, agent.weights.dim(), cfg.agent.shared_traces);
  TraceState tr;
  FeatureVector x = features_of(cfg, tr);
  std::vector<StepOutcome> recording;

  for (;;) {
    const std::vector<double> qs = q_values(agent.weights, x);
    const auto a = static_cast<Action>(select_action(qs, agent.epsilon, explore));
    StepOutcome out = step(env, a, cfg.task);

    TraceState next = tr;
    if (env.tones_heard == 0 && out.next_state.tones_heard == 1) {
      next = deploy_event(std::move(next), 1, zeta);
    } else {
      next = tick(std::move(next));
    }
    if (!out.sensor_slice.empty()) recording.push_back(out);
    if (env.tones_heard < 2 && out.next_state.tones_heard == 2) {
      InjectedTau inj;
      try {
        inj = perceive_interval(cfg, est, out.next_state, recording);
      } catch (const std::exception& ex) {
        throw EpisodeAbort(index, ex.what());
      }
      log.estimated_tau = inj.tau;
      log.clamped = inj.clamped;
      next = override_age(std::move(next), 1, tau_to_steps(inj.tau, cfg.task.dt));
      next = deploy_event(std::move(next), 2, zeta);
    }
    if (out.done && out.reward != 0.0 && zeta >= 3 && !next.find(3)) next = deploy_event(std::move(next), 3, zeta);

    const FeatureVector x_next = features_of(cfg, next);
    double q_next_max = 0.0;
    if (!out.done) {
      const auto qn = q_values(agent.weights, x_next);
      q_next_max = *std::max_element(qn.begin(), qn.end());
    }
    const double delta = td_error(out.reward, cfg.agent.gamma, q_next_max, qs[static_cast<std::size_t>(a)], out.done);
    update(agent.weights, traces, x, static_cast<std::size_t>(a), delta, cfg.agent);
    if (!cfg.agent.epsilon_per_episode) agent.epsilon = decay_epsilon(agent.epsilon, cfg.agent);

    record_step(log, env, a, out, delta);
    env = out.next_state;
    if (out.done) break;
    tr = std::move(next);
    x = x_next;
  }
  finish_log(log, env, cfg.task);
  return log;
}

std::size_t tabular_index(const RunConfig& cfg, AgentState& agent, const std::vector<int>& history) {
  if (cfg.representation == Representation::Tabular) return static_cast<std::size_t>(history.back());
  auto [it, inserted] = agent.history_index.try_emplace(history, agent.table.states());
  if (inserted) agent.table.add_state();
  return it->second;
}

EpisodeLog run_tabular_episode(const RunConfig& cfg, AgentState& agent, int index, std::mt19937_64& explore,
                               EnvState env) {
  EpisodeLog log;
  log.index = index;
  log.epsilon_start = agent.epsilon;
  std::vector<int> history{static_cast<int>(env.phase)};
  std::size_t s = tabular_index(cfg, agent, history);

  for (;;) {
    const auto row = agent.table.row(s);
    const std::vector<double> qs(row.begin(), row.end());
    const auto a = static_cast<Action>(select_action(qs, agent.epsilon, explore));
    StepOutcome out = step(env, a, cfg.task);

    std::size_t s_next = s;
    if (!out.done) {
      history.push_back(static_cast<int>(out.next_state.phase));
      s_next = tabular_index(cfg, agent, history);
    }
    const double delta =
        tabular_update(agent.table, s, static_cast<std::size_t>(a), out.reward, s_next, out.done, cfg.agent);
    if (!cfg.agent.epsilon_per_episode) agent.epsilon = decay_epsilon(agent.epsilon, cfg.agent);

    record_step(log, env, a, out, delta);
    env = out.next_state;
    if (out.done) break;
    s = s_next;
  }
  finish_log(log, env, cfg.task);
  return log;
}

}  // namespace

EstimatorContext prepare_estimator(const RunConfig& cfg) {
  EstimatorContext est;
  est.grid = cfg.tau_grid.resolve(cfg.task);
  est.params = cfg.task.true_ou_params;
  if (!is_linear(cfg.representation) || cfg.oracle_tau) return est;

  const auto n = static_cast<std::size_t>(std::llround(cfg.calibration_duration / cfg.calibration_dt));
  const SensorBatch calibration =
      sample_paths(cfg.task.true_ou_params, SampleTimes::with_spacing(n, cfg.calibration_dt),
                   static_cast<std::size_t>(cfg.task.sensor_channels), mix64(cfg.master_seed ^ kCalibrationStream));
  try {
    est.fit = fit_hyperparams(calibration, cfg.fit);
  } catch (const std::exception& ex) {
    throw EpisodeAbort(0, std::string("calibration fit: ") + ex.what());
  }
  est.params = est.fit->params;
  return est;
}

AgentState initial_agent(const RunConfig& cfg) {
  AgentState agent;
  agent.epsilon = cfg.agent.epsilon0;
  if (is_linear(cfg.representation)) {
    std::mt19937_64 rng(mix64(cfg.master_seed ^ kWeightStream));
    agent.weights = QWeights::random_uniform(kActionCount, feature_dim(cfg), rng);
  } else if (cfg.representation == Representation::Tabular) {
    agent.table = QTable(3, kActionCount);  // Init, Tone, Interval
  }
  return agent;
}

EpisodeLog run_episode(const RunConfig& cfg, const EstimatorContext& est, AgentState& agent, int index) {
  const std::uint64_t seed = episode_seed(cfg.master_seed, static_cast<std::uint64_t>(index));
  const EnvState env = reset(cfg.task, mix64(seed ^ 0x1ULL));
  std::mt19937_64 explore(mix64(seed ^ 0x2ULL));

  EpisodeLog log = is_linear(cfg.representation) ? run_linear_episode(cfg, est, agent, index, explore, env)
                                                 : run_tabular_episode(cfg, agent, index, explore, env);
  if (cfg.agent.epsilon_per_episode) agent.epsilon = decay_epsilon(agent.epsilon, cfg.agent);
  log.epsilon_end = agent.epsilon;
  return log;
}

std::size_t analysis_start(const std::vector<EpisodeLog>& logs, double epsilon_threshold) {
  for (std::size_t i = 0; i < logs.size(); ++i)
    if (logs[i].epsilon_start < epsilon_threshold) return i;
  return logs.size();
}

std::optional<int> convergence_episode(const std::vector<EpisodeLog>& logs, int window, double threshold) {
  const auto w = static_cast<std::size_t>(window);
  if (logs.size() < w) return std::nullopt;
  long sum = 0;
  for (std::size_t i = 0; i < logs.size(); ++i) {
    sum += logs[i].points;
    if (i >= w) sum -= logs[i - w].points;
    if (i + 1 >= w && static_cast<double>(sum) / static_cast<double>(w) >= threshold)
      return logs[i].index;
  }
  return std::nullopt;
}

PsychometricCurve psychometric(const std::vector<EpisodeLog>& logs, const TaskConfig& task, std::size_t from) {
  std::vector<int> longs(static_cast<std::size_t>(task.max_interval_steps) + 1, 0);
  std::vector<int> counts(longs.size(), 0);
  for (std::size_t i = from; i < logs.size(); ++i) {
    const auto& l = logs[i];
    if (!l.classification) continue;
    const auto k = static_cast<std::size_t>(l.true_interval_steps);
    ++counts[k];
    if (*l.classification == Action::Long) ++longs[k];
  }
  PsychometricCurve curve;
  for (std::size_t k = 1; k < counts.size(); ++k) {
    if (counts[k] == 0) continue;
    curve.push_back({task.seconds(static_cast<int>(k)),
                     static_cast<double>(longs[k]) / static_cast<double>(counts[k]), counts[k]});
  }
  return curve;
}

std::vector<double> isotonic_fit(const PsychometricCurve& curve) {
  struct Block {
    double sum;
    double weight;
    std::size_t len;
  };
  std::vector<Block> blocks;
  for (const auto& b : curve) {
    const double w = std::max(1, b.count);
    blocks.push_back({b.p_long * w, w, 1});
    while (blocks.size() > 1) {
      auto& last = blocks[blocks.size() - 1];
      auto& prev = blocks[blocks.size() - 2];
      if (prev.sum / prev.weight <= last.sum / last.weight) break;
      prev.sum += last.sum;
      prev.weight += last.weight;
      prev.len += last.len;
      blocks.pop_back();
    }
  }
  std::vector<double> out;
  out.reserve(curve.size());
  for (const auto& b : blocks) out.insert(out.end(), b.len, b.sum / b.weight);
  return out;
}

std::vector<std::pair<int, double>> td_error_trajectory(const std::vector<EpisodeLog>& logs, int window) {
  if (window < 1) throw ContractError("td-error window must be >= 1");
  std::vector<std::pair<int, double>> out;
  out.reserve(logs.size());
  double sum = 0.0;
  const auto w = static_cast<std::size_t>(window);
  for (std::size_t i = 0; i < logs.size(); ++i) {
    sum += std::abs(logs[i].delta_at_reward);
    if (i >= w) sum -= std::abs(logs[i - w].delta_at_reward);
    const auto n = static_cast<double>(std::min(i + 1, w));
    out.emplace_back(logs[i].index, sum / n);
  }
  return out;
}

RunResult run_experiment(const RunConfig& cfg) {
  cfg.validate();
  RunResult res;
  const EstimatorContext est = prepare_estimator(cfg);
  res.agent = initial_agent(cfg);
  res.logs.reserve(static_cast<std::size_t>(cfg.episodes));
  for (int i = 1; i <= cfg.episodes; ++i) res.logs.push_back(run_episode(cfg, est, res.agent, i));

  RunSummary& s = res.summary;
  s.episodes = cfg.episodes;
  s.fit = est.fit;
  s.final_epsilon = res.agent.epsilon;
  s.convergence_episode = convergence_episode(res.logs, cfg.analysis.convergence_window, cfg.analysis.convergence_points);
  const std::size_t from = analysis_start(res.logs, cfg.analysis.epsilon_threshold);
  s.analysis_start = static_cast<int>(from);

  std::vector<double> wrong;
  for (std::size_t i = 0; i < res.logs.size(); ++i) {
    const auto& l = res.logs[i];
    if (l.clamped) ++s.clamped_estimates;
    if (i >= from && l.classification && !l.correct) wrong.push_back(cfg.task.seconds(l.true_interval_steps));
  }
  s.misclassified_total = static_cast<int>(wrong.size());
  if (!wrong.empty()) {
    s.misclassified_mean_s = std::accumulate(wrong.begin(), wrong.end(), 0.0) / static_cast<double>(wrong.size());
    std::sort(wrong.begin(), wrong.end());
    const std::size_t mid = wrong.size() / 2;
    s.misclassified_median_s = wrong.size() % 2 ? wrong[mid] : 0.5 * (wrong[mid - 1] + wrong[mid]);
  }
  return res;
}

std::vector<SweepRow> tau_accuracy_sweep(const SweepConfig& cfg, const std::vector<double>& true_intervals,
                                         const std::vector<std::uint64_t>& seeds) {
  if (cfg.jobs < 1) throw ContractError("jobs must be >= 1");
  if (!(cfg.sample_dt > 0.0) || cfg.channels < 1) throw ContractError("invalid sweep sampling");
  const std::size_t per = seeds.size();
  std::vector<double> est(true_intervals.size() * per, 0.0);

  auto work = [&](std::size_t task) {
    const std::size_t ti = task / per;
    const double tau = true_intervals[ti];
    const auto n = static_cast<std::size_t>(std::llround(tau / cfg.sample_dt)) + 1;
    const auto batch = sample_paths(cfg.params, SampleTimes::uniform(n, tau),
                                    static_cast<std::size_t>(cfg.channels),
                                    mix64(seeds[task % per] ^ mix64(ti + 1)));
    est[task] = estimate_tau(batch, cfg.params, cfg.grid).tau_hat;
  };

  const std::size_t total = est.size();
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), std::max<std::size_t>(total, 1));
  if (jobs <= 1) {
    for (std::size_t t = 0; t < total; ++t) work(t);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::thread> pool;
    for (std::size_t j = 0; j < jobs; ++j) {
      pool.emplace_back([&, j] {
        try {
          for (std::size_t t = j; t < total; t += jobs) work(t);
        } catch (...) {
          errors[j] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  std::vector<SweepRow> rows;
  for (std::size_t ti = 0; ti < true_intervals.size(); ++ti) {
    SweepRow r;
    r.true_tau = true_intervals[ti];
    r.estimates.assign(est.begin() + static_cast<long>(ti * per), est.begin() + static_cast<long>((ti + 1) * per));
    if (!r.estimates.empty()) {
      r.mean_tau_hat = std::accumulate(r.estimates.begin(), r.estimates.end(), 0.0) / static_cast<double>(per);
      double ss = 0.0;
      for (double v : r.estimates) ss += (v - r.mean_tau_hat) * (v - r.mean_tau_hat);
      r.std_tau_hat = per > 1 ? std::sqrt(ss / static_cast<double>(per - 1)) : 0.0;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace tperc
