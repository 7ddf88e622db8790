#include "tperc/ou_process.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "tperc/errors.hpp"

namespace tperc {

void OUHyperparams::validate() const {
  if (!std::isfinite(lambda) || !std::isfinite(sigma))
    throw ParameterDomainError("OU hyperparameters must be finite");
  if (lambda <= 0.0) throw ParameterDomainError("lambda must be > 0, got " + std::to_string(lambda));
  if (sigma < 0.0) throw ParameterDomainError("sigma must be >= 0, got " + std::to_string(sigma));
}

SampleTimes::SampleTimes(std::vector<double> times) : times_(std::move(times)) {
  if (times_.size() < 2) throw ContractError("SampleTimes needs at least two samples");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!std::isfinite(times_[i])) throw ContractError("SampleTimes must be finite");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw ContractError("SampleTimes must be strictly increasing");
  }
}

SampleTimes SampleTimes::uniform(std::size_t n, double span) {
  if (n < 2) throw ContractError("SampleTimes needs at least two samples");
  return with_spacing(n, span / static_cast<double>(n - 1));
}

SampleTimes SampleTimes::with_spacing(std::size_t n, double step) {
  if (!(step > 0.0)) throw ContractError("sample spacing must be positive");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<double>(i) * step;
  return SampleTimes(std::move(t));
}

KernelMatrix KernelMatrix::from_entries(Eigen::MatrixXd entries) {
  if (entries.rows() != entries.cols() || entries.rows() == 0)
    throw ContractError("kernel matrix must be square and non-empty");
  if (!entries.allFinite()) throw ParameterDomainError("kernel matrix has non-finite entries");

  KernelMatrix k;
  k.entries_ = std::move(entries);
  k.llt_.compute(k.entries_);
  if (k.llt_.info() == Eigen::Success) return k;

  // Only the diagonal is touched; off-diagonal entries stay bit-identical.
  const Eigen::VectorXd base_diag = k.entries_.diagonal();
  for (double jitter = kFirstJitter; jitter <= kMaxJitter * 1.0000001; jitter *= 10.0) {
    k.entries_.diagonal() = base_diag.array() + jitter;
    k.llt_.compute(k.entries_);
    if (k.llt_.info() == Eigen::Success) {
      k.jitter_ = jitter;
      return k;
    }
  }
  throw ConditioningError("Cholesky failed with jitter up to 1e-4");
}

double KernelMatrix::log_det() const {
  return 2.0 * llt_.matrixLLT().diagonal().array().log().sum();
}

KernelMatrix build_kernel(const OUHyperparams& params, const SampleTimes& times) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd k(n, n);
  const double diag = 1.0 + params.sigma * params.sigma;
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = diag;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = std::exp(-params.lambda * std::abs(times[i] - times[j]));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return KernelMatrix::from_entries(std::move(k));
}

Eigen::MatrixXd kernel_dlambda(const OUHyperparams& params, const SampleTimes& times) {
  const auto n = static_cast<Eigen::Index>(times.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double lag = std::abs(times[i] - times[j]);
      const double v = -lag * std::exp(-params.lambda * lag);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

void SensorBatch::validate() const {
  if (channels.empty()) throw ContractError("sensor batch has no channels");
  for (const auto& c : channels) {
    if (static_cast<std::size_t>(c.size()) != sample_times.size())
      throw ContractError("channel length does not match the number of sample times");
  }
}

SensorBatch sample_paths(const OUHyperparams& params, const SampleTimes& times, std::size_t m,
                         std::uint64_t seed) {
  if (m == 0) throw ContractError("sample_paths needs at least one channel");
  const KernelMatrix k = build_kernel(params, times);
  const Eigen::MatrixXd lower = k.cholesky().matrixL();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto n = static_cast<Eigen::Index>(times.size());

  SensorBatch batch{{}, times};
  batch.channels.reserve(m);
  Eigen::VectorXd z(n);
  for (std::size_t c = 0; c < m; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    batch.channels.emplace_back(lower * z);
  }
  return batch;
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2 pi)

void check_length(const Eigen::VectorXd& y, Eigen::Index n) {
  if (y.size() != n)
    throw ContractError("observation length " + std::to_string(y.size()) +
                        " does not match kernel size " + std::to_string(n));
}

}  // namespace

double log_likelihood(const Eigen::VectorXd& y, const KernelMatrix& kernel) {
  const Eigen::Index n = kernel.size();
  check_length(y, n);
  // y^T K^-1 y = |L^-1 y|^2
  const Eigen::VectorXd half = kernel.cholesky().matrixL().solve(y);
  return -0.5 * half.squaredNorm() - 0.5 * kernel.log_det() - 0.5 * static_cast<double>(n) * kLog2Pi;
}

double batch_log_likelihood(const SensorBatch& batch, const KernelMatrix& kernel) {
  double total = 0.0;
  for (const auto& y : batch.channels) total += log_likelihood(y, kernel);
  return total;
}

BatchLoglik batch_loglik_and_gradient(const SensorBatch& batch, const OUHyperparams& params) {
  batch.validate();
  const KernelMatrix k = build_kernel(params, batch.sample_times);
  const Eigen::Index n = k.size();
  const Eigen::MatrixXd k_inv = k.cholesky().solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::MatrixXd dk_dlambda = kernel_dlambda(params, batch.sample_times);

  const auto m = static_cast<double>(batch.channel_count());
  // Sum over channels of tr((phi phi^T - K^-1) dK) = sum_c phi_c^T dK phi_c - M tr(K^-1 dK)
  const double trace_lambda = (k_inv.array() * dk_dlambda.array()).sum();  // dK symmetric
  const double trace_sigma = 2.0 * params.sigma * k_inv.trace();

  BatchLoglik out;
  double quad_lambda = 0.0;
  double quad_sigma = 0.0;
  for (const auto& y : batch.channels) {
    const Eigen::VectorXd phi = k.solve(y);
    out.value += -0.5 * y.dot(phi);
    quad_lambda += phi.dot(dk_dlambda * phi);
    quad_sigma += 2.0 * params.sigma * phi.squaredNorm();
  }
  out.value += -0.5 * m * (k.log_det() + static_cast<double>(n) * kLog2Pi);
  out.gradient.d_lambda = 0.5 * (quad_lambda - m * trace_lambda);
  out.gradient.d_sigma = 0.5 * (quad_sigma - m * trace_sigma);
  return out;
}

LoglikGradient loglik_gradient(const Eigen::VectorXd& y, const OUHyperparams& params,
                               const SampleTimes& times) {
  check_length(y, static_cast<Eigen::Index>(times.size()));
  SensorBatch single{{y}, times};
  return batch_loglik_and_gradient(single, params).gradient;
}

}  // namespace tperc
