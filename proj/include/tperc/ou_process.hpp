#pragma once

// Ornstein-Uhlenbeck Gaussian-process core.
//
// Covariance between two observations taken at times t_i, t_j:
//
//   K_ij = exp(-lambda * |t_i - t_j|) + sigma^2 * [i == j]
//
// The exponential term is the stationary OU correlation (unit variance), the
// second term is white observation noise.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace tperc {

struct OUHyperparams {
  double lambda = 0.65;  // decay rate [1/s], > 0
  double sigma = 0.45;   // observation noise std, >= 0

  // Throws ParameterDomainError when non-finite or out of range.
  void validate() const;
};

// Strictly increasing sample times in seconds, at least two of them.
class SampleTimes {
 public:
  explicit SampleTimes(std::vector<double> times);

  // n samples spaced uniformly over [0, span].
  static SampleTimes uniform(std::size_t n, double span);
  // n samples at 0, step, 2*step, ...
  static SampleTimes with_spacing(std::size_t n, double step);

  std::size_t size() const noexcept { return times_.size(); }
  double operator[](std::size_t i) const noexcept { return times_[i]; }
  std::span<const double> values() const noexcept { return times_; }

 private:
  std::vector<double> times_;
};

// Covariance matrix together with its Cholesky factor. `jitter` is the diagonal
// stabiliser that was needed for the factorisation to succeed (0 normally).
class KernelMatrix {
 public:
  // Factorises a caller-supplied symmetric matrix, escalating jitter if needed.
  static KernelMatrix from_entries(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& entries() const noexcept { return entries_; }
  const Eigen::LLT<Eigen::MatrixXd>& cholesky() const noexcept { return llt_; }
  double jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return entries_.rows(); }

  // log det K, from the factor diagonal.
  double log_det() const;
  // K^-1 v
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const { return llt_.solve(v); }

 private:
  KernelMatrix() = default;
  Eigen::MatrixXd entries_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  double jitter_ = 0.0;
};

// Jitter ladder: 0, then 1e-10, 1e-9, ..., 1e-4, then ConditioningError.
inline constexpr double kFirstJitter = 1e-10;
inline constexpr double kMaxJitter = 1e-4;

KernelMatrix build_kernel(const OUHyperparams& params, const SampleTimes& times);

// dK/dlambda; dK/dsigma is 2*sigma*I and is not materialised.
Eigen::MatrixXd kernel_dlambda(const OUHyperparams& params, const SampleTimes& times);

// M channels of N observations sharing one time axis.
struct SensorBatch {
  std::vector<Eigen::VectorXd> channels;
  SampleTimes sample_times;

  std::size_t channel_count() const noexcept { return channels.size(); }
  std::size_t sample_count() const noexcept { return sample_times.size(); }

  // Throws ContractError when M == 0 or a channel length differs from N.
  void validate() const;
};

// Draws `m` independent channels from N(0, K) as L * z with K = L L^T.
SensorBatch sample_paths(const OUHyperparams& params, const SampleTimes& times, std::size_t m,
                         std::uint64_t seed);

// log N(y; 0, K) = -1/2 y^T K^-1 y - 1/2 log det(2 pi K)
double log_likelihood(const Eigen::VectorXd& y, const KernelMatrix& kernel);

struct LoglikGradient {
  double d_lambda = 0.0;
  double d_sigma = 0.0;
};

// d/dtheta log p(y | theta) = 1/2 tr((phi phi^T - K^-1) dK/dtheta), phi = K^-1 y.
LoglikGradient loglik_gradient(const Eigen::VectorXd& y, const OUHyperparams& params,
                               const SampleTimes& times);

// Summed log-likelihood and gradient over every channel in the batch, sharing
// one factorisation. Used by the hyperparameter fit.
struct BatchLoglik {
  double value = 0.0;
  LoglikGradient gradient;
};
BatchLoglik batch_loglik_and_gradient(const SensorBatch& batch, const OUHyperparams& params);
double batch_log_likelihood(const SensorBatch& batch, const KernelMatrix& kernel);

}  // namespace tperc
