#pragma once

// Hyperparameter fitting and maximum-likelihood interval estimation on top of
// the OU Gaussian-process core.

#include <cstdint>
#include <utility>
#include <vector>

#include "tperc/errors.hpp"
#include "tperc/ou_process.hpp"

namespace tperc {

struct FitConfig {
  double init_lambda = 0.5;
  double init_sigma = 0.5;
  int max_iters = 500;
  double step_tolerance = 1e-4;  // on the log-parameter step
  double learning_rate = 0.05;
  int max_halvings = 20;

  void validate() const;
};

struct FitResult {
  OUHyperparams params;
  double log_likelihood = 0.0;  // summed over channels
  int iterations = 0;
  bool converged = false;
};

// Projected gradient ascent in (log lambda, log sigma). Log-parameters are
// clamped to these boxes so degenerate inputs still terminate.
inline constexpr double kMinLambda = 1e-4;
inline constexpr double kMaxLambda = 1e3;
inline constexpr double kMinSigma = 1e-4;
inline constexpr double kMaxSigma = 1e2;

// Raised when the objective turns non-finite; carries the last valid iterate.
class FitNumericalError : public std::runtime_error {
 public:
  FitNumericalError(const std::string& what, FitResult last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const FitResult& last_valid() const noexcept { return last_; }

 private:
  FitResult last_;
};

FitResult fit_hyperparams(const SensorBatch& batch, const FitConfig& cfg = {});

class TauGrid {
 public:
  explicit TauGrid(std::vector<double> candidates);
  // start, start+step, ... up to and including stop (with a small tolerance).
  static TauGrid range(double start, double step, double stop);

  std::size_t size() const noexcept { return candidates_.size(); }
  double operator[](std::size_t i) const noexcept { return candidates_[i]; }
  const std::vector<double>& candidates() const noexcept { return candidates_; }
  double front() const { return candidates_.front(); }
  double back() const { return candidates_.back(); }

 private:
  std::vector<double> candidates_;
};

struct TimeEstimate {
  double tau_hat = 0.0;
  std::vector<std::pair<double, double>> profile;  // (candidate, summed log-likelihood)
};

// For each candidate tau the N observations are re-read as uniformly spaced
// over [0, tau]. Ties go to the smallest candidate.
TimeEstimate estimate_tau(const SensorBatch& batch, const OUHyperparams& params, const TauGrid& grid);

// Uniformly random k-subset of the channels, kept in their original order.
SensorBatch subsample_channels(const SensorBatch& batch, std::size_t k, std::uint64_t seed);

}  // namespace tperc
