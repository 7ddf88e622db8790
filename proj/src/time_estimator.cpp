#include "tperc/time_estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace tperc {

void FitConfig::validate() const {
  if (max_iters < 1) throw ContractError("fit max_iters must be >= 1");
  if (!(step_tolerance > 0.0)) throw ContractError("fit step_tolerance must be > 0");
  if (!(learning_rate > 0.0)) throw ContractError("fit learning_rate must be > 0");
  if (max_halvings < 0) throw ContractError("fit max_halvings must be >= 0");
  OUHyperparams{init_lambda, init_sigma}.validate();
  if (init_sigma <= 0.0) throw ContractError("fit init_sigma must be > 0 (log-parameterised)");
}

namespace {

struct LogPoint {
  double log_lambda;
  double log_sigma;

  OUHyperparams params() const { return {std::exp(log_lambda), std::exp(log_sigma)}; }
};

LogPoint project(LogPoint p) {
  p.log_lambda = std::clamp(p.log_lambda, std::log(kMinLambda), std::log(kMaxLambda));
  p.log_sigma = std::clamp(p.log_sigma, std::log(kMinSigma), std::log(kMaxSigma));
  return p;
}

struct Evaluation {
  double value = -std::numeric_limits<double>::infinity();  // per-observation mean
  double g_log_lambda = 0.0;
  double g_log_sigma = 0.0;
  double total = 0.0;
  bool ok = false;
};

Evaluation evaluate(const SensorBatch& batch, const LogPoint& p) {
  Evaluation e;
  const OUHyperparams theta = p.params();
  BatchLoglik bl;
  try {
    bl = batch_loglik_and_gradient(batch, theta);
  } catch (const ConditioningError&) {
    return e;
  } catch (const ParameterDomainError&) {
    return e;
  }
  const double scale =
      1.0 / static_cast<double>(batch.channel_count() * batch.sample_count());
  e.total = bl.value;
  e.value = bl.value * scale;
  // chain rule: d/dlog(x) = x d/dx
  e.g_log_lambda = bl.gradient.d_lambda * theta.lambda * scale;
  e.g_log_sigma = bl.gradient.d_sigma * theta.sigma * scale;
  e.ok = std::isfinite(e.value) && std::isfinite(e.g_log_lambda) && std::isfinite(e.g_log_sigma);
  return e;
}

}  // namespace

FitResult fit_hyperparams(const SensorBatch& batch, const FitConfig& cfg) {
  cfg.validate();
  batch.validate();

  LogPoint x = project({std::log(cfg.init_lambda), std::log(cfg.init_sigma)});
  Evaluation cur = evaluate(batch, x);
  FitResult best{x.params(), cur.total, 0, false};
  if (!cur.ok) throw FitNumericalError("log-likelihood is not finite at the initial point", best);

  // The objective is averaged over observations so the step size does not
  // depend on how much data there is. A successful step lets the rate grow
  // again; a failed one halves it.
  double rate = cfg.learning_rate;
  const double max_rate = cfg.learning_rate * 1e3;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    best.iterations = it;
    bool accepted = false;
    double step_norm = 0.0;
    for (int h = 0; h <= cfg.max_halvings; ++h) {
      const LogPoint trial =
          project({x.log_lambda + rate * cur.g_log_lambda, x.log_sigma + rate * cur.g_log_sigma});
      step_norm = std::hypot(trial.log_lambda - x.log_lambda, trial.log_sigma - x.log_sigma);
      if (step_norm == 0.0) break;
      Evaluation next = evaluate(batch, trial);
      if (next.ok && next.value > cur.value) {
        x = trial;
        cur = next;
        accepted = true;
        break;
      }
      rate *= 0.5;
    }

    if (!accepted) {
      // No ascent direction left at resolvable step sizes: stationary point.
      best.converged = true;
      break;
    }
    best.params = x.params();
    best.log_likelihood = cur.total;
    if (step_norm < cfg.step_tolerance) {
      best.converged = true;
      break;
    }
    rate = std::min(rate * 1.5, max_rate);
  }
  return best;
}

TauGrid::TauGrid(std::vector<double> candidates) : candidates_(std::move(candidates)) {
  if (candidates_.empty()) throw ContractError("tau grid is empty");
  for (std::size_t i = 0; i < candidates_.size(); ++i) {
    if (!(candidates_[i] > 0.0) || !std::isfinite(candidates_[i]))
      throw ContractError("tau candidates must be finite and > 0");
    if (i > 0 && !(candidates_[i] > candidates_[i - 1]))
      throw ContractError("tau candidates must be strictly increasing");
  }
}

TauGrid TauGrid::range(double start, double step, double stop) {
  if (!(step > 0.0)) throw ContractError("tau grid step must be > 0");
  if (!(stop >= start)) throw ContractError("tau grid stop must be >= start");
  std::vector<double> c;
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  c.reserve(count);
  for (std::size_t i = 0; i < count; ++i) c.push_back(start + static_cast<double>(i) * step);
  return TauGrid(std::move(c));
}

TimeEstimate estimate_tau(const SensorBatch& batch, const OUHyperparams& params, const TauGrid& grid) {
  batch.validate();
  params.validate();
  const std::size_t n = batch.sample_count();

  TimeEstimate out;
  out.profile.reserve(grid.size());
  double best = -std::numeric_limits<double>::infinity();
  for (double tau : grid.candidates()) {
    const KernelMatrix k = build_kernel(params, SampleTimes::uniform(n, tau));
    const double ll = batch_log_likelihood(batch, k);
    out.profile.emplace_back(tau, ll);
    // strict comparison keeps the smallest candidate on ties
    if (ll > best || out.profile.size() == 1) {
      best = ll;
      out.tau_hat = tau;
    }
  }
  return out;
}

SensorBatch subsample_channels(const SensorBatch& batch, std::size_t k, std::uint64_t seed) {
  batch.validate();
  if (k < 1 || k > batch.channel_count())
    throw ContractError("subsample size must be in [1, " + std::to_string(batch.channel_count()) + "]");
  std::vector<std::size_t> all(batch.channel_count());
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);

  SensorBatch out{{}, batch.sample_times};
  out.channels.reserve(k);
  for (std::size_t i : picked) out.channels.push_back(batch.channels[i]);
  return out;
}

}  // namespace tperc
