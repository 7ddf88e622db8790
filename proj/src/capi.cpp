#include "tperc/tperc.h"

#include <algorithm>
#include <cstring>
#include <exception>
#include <memory>
#include <string>
#include <vector>

#include "tperc/errors.hpp"
#include "tperc/io.hpp"

struct tperc_batch {
  tperc::SensorBatch batch;
};

struct tperc_config {
  tperc::RunConfig cfg;
};

struct tperc_estimate {
  tperc::TimeEstimate est;
  tperc::OUHyperparams params;
};

namespace {

thread_local std::string g_error;
thread_local std::size_t g_error_line = 0;

tperc_status fail(tperc_status code, const char* what, std::size_t line = 0) {
  g_error = what;
  g_error_line = line;
  return code;
}

// Maps library exceptions onto status codes. Must be called from a catch block.
tperc_status translate() {
  try {
    throw;
  } catch (const tperc::InputError& e) {
    return fail(TPERC_ERR_INPUT, e.what(), e.line());
  } catch (const tperc::EpisodeAbort& e) {
    return fail(TPERC_ERR_NUMERICAL, e.what());
  } catch (const tperc::FitNumericalError& e) {
    return fail(TPERC_ERR_NUMERICAL, e.what());
  } catch (const tperc::ConditioningError& e) {
    return fail(TPERC_ERR_NUMERICAL, e.what());
  } catch (const tperc::ContractError& e) {
    return fail(TPERC_ERR_CONTRACT, e.what());
  } catch (const tperc::ParameterDomainError& e) {
    return fail(TPERC_ERR_CONTRACT, e.what());
  } catch (const std::exception& e) {
    return fail(TPERC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(TPERC_ERR_INTERNAL, "unknown error");
  }
}

template <typename F>
tperc_status guarded(F&& f) {
  g_error.clear();
  g_error_line = 0;
  try {
    return f();
  } catch (...) {
    return translate();
  }
}

tperc_status null_arg(const char* name) { return fail(TPERC_ERR_CONTRACT, (std::string(name) + " is NULL").c_str()); }

void fill(tperc_fit_result* out, const tperc::FitResult& r) {
  out->lambda = r.params.lambda;
  out->sigma = r.params.sigma;
  out->log_likelihood = r.log_likelihood;
  out->iterations = r.iterations;
  out->converged = r.converged ? 1 : 0;
}

}  // namespace

extern "C" {

const char* tperc_version(void) { return TPERC_VERSION; }

const char* tperc_last_error(void) { return g_error.c_str(); }

size_t tperc_last_error_line(void) { return g_error_line; }

tperc_status tperc_batch_generate(double lambda, double sigma, size_t samples, double dt, size_t channels,
                                  uint64_t seed, tperc_batch** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    tperc::OUHyperparams p{lambda, sigma};
    auto b = std::make_unique<tperc_batch>(
        tperc_batch{tperc::sample_paths(p, tperc::SampleTimes::with_spacing(samples, dt), channels, seed)});
    *out = b.release();
    return TPERC_OK;
  });
}

tperc_status tperc_batch_read_csv(const char* path, tperc_batch** out) {
  if (!path) return null_arg("path");
  if (!out) return null_arg("out");
  return guarded([&] {
    auto b = std::make_unique<tperc_batch>(tperc_batch{tperc::io::read_sensor_csv(path)});
    *out = b.release();
    return TPERC_OK;
  });
}

tperc_status tperc_batch_write_csv(const tperc_batch* batch, const char* path) {
  if (!batch) return null_arg("batch");
  if (!path) return null_arg("path");
  return guarded([&] {
    tperc::io::write_sensor_csv(batch->batch, path);
    return TPERC_OK;
  });
}

size_t tperc_batch_channels(const tperc_batch* batch) { return batch ? batch->batch.channel_count() : 0; }

size_t tperc_batch_samples(const tperc_batch* batch) { return batch ? batch->batch.sample_count() : 0; }

tperc_status tperc_batch_time(const tperc_batch* batch, size_t sample, double* out) {
  if (!batch) return null_arg("batch");
  if (!out) return null_arg("out");
  if (sample >= batch->batch.sample_count()) return fail(TPERC_ERR_CONTRACT, "sample index out of range");
  *out = batch->batch.sample_times[sample];
  return TPERC_OK;
}

tperc_status tperc_batch_value(const tperc_batch* batch, size_t channel, size_t sample, double* out) {
  if (!batch) return null_arg("batch");
  if (!out) return null_arg("out");
  if (channel >= batch->batch.channel_count() || sample >= batch->batch.sample_count())
    return fail(TPERC_ERR_CONTRACT, "index out of range");
  *out = batch->batch.channels[channel](static_cast<Eigen::Index>(sample));
  return TPERC_OK;
}

void tperc_batch_free(tperc_batch* batch) { delete batch; }

tperc_status tperc_config_new(tperc_config** out) {
  if (!out) return null_arg("out");
  return guarded([&] {
    *out = new tperc_config{};
    return TPERC_OK;
  });
}

tperc_status tperc_config_load(tperc_config* cfg, const char* path) {
  if (!cfg) return null_arg("cfg");
  if (!path) return null_arg("path");
  return guarded([&] {
    cfg->cfg = tperc::io::read_config(path, cfg->cfg);
    return TPERC_OK;
  });
}

tperc_status tperc_config_set(tperc_config* cfg, const char* key, const char* value) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] {
    tperc::io::apply_config_value(cfg->cfg, key, value);
    return TPERC_OK;
  });
}

tperc_status tperc_config_get(const tperc_config* cfg, const char* key, char* buf, size_t len, size_t* needed) {
  if (!cfg) return null_arg("cfg");
  if (!key) return null_arg("key");
  return guarded([&] {
    for (const auto& [k, v] : tperc::io::config_entries(cfg->cfg)) {
      if (k != key) continue;
      if (needed) *needed = v.size();
      if (buf && len > 0) {
        const std::size_t n = std::min(len - 1, v.size());
        std::memcpy(buf, v.data(), n);
        buf[n] = '\0';
      }
      return TPERC_OK;
    }
    return fail(TPERC_ERR_INPUT, (std::string("unknown config key '") + key + "'").c_str());
  });
}

void tperc_config_free(tperc_config* cfg) { delete cfg; }

tperc_status tperc_fit(const tperc_batch* batch, const tperc_config* cfg, tperc_fit_result* out) {
  if (!batch) return null_arg("batch");
  if (!out) return null_arg("out");
  return guarded([&] {
    const tperc::FitConfig fc = cfg ? cfg->cfg.fit : tperc::FitConfig{};
    try {
      const auto r = tperc::fit_hyperparams(batch->batch, fc);
      fill(out, r);
      if (!r.converged) return fail(TPERC_NOT_CONVERGED, "iteration budget exhausted before convergence");
      return TPERC_OK;
    } catch (const tperc::FitNumericalError& e) {
      fill(out, e.last_valid());
      throw;
    }
  });
}

tperc_status tperc_fit_write_json(const tperc_fit_result* fit, const char* path) {
  if (!fit) return null_arg("fit");
  if (!path) return null_arg("path");
  return guarded([&] {
    tperc::FitResult r;
    r.params = {fit->lambda, fit->sigma};
    r.log_likelihood = fit->log_likelihood;
    r.iterations = fit->iterations;
    r.converged = fit->converged != 0;
    tperc::io::write_text(path, tperc::io::fit_json(r));
    return TPERC_OK;
  });
}

tperc_status tperc_hyperparams_read_json(const char* path, double* lambda, double* sigma) {
  if (!path) return null_arg("path");
  if (!lambda || !sigma) return null_arg("lambda/sigma");
  return guarded([&] {
    const auto p = tperc::io::read_hyperparams_json(path);
    *lambda = p.lambda;
    *sigma = p.sigma;
    return TPERC_OK;
  });
}

tperc_status tperc_estimate_tau(const tperc_batch* batch, double lambda, double sigma, const char* grid,
                                tperc_estimate** out) {
  if (!batch) return null_arg("batch");
  if (!grid) return null_arg("grid");
  if (!out) return null_arg("out");
  return guarded([&] {
    const tperc::OUHyperparams p{lambda, sigma};
    const tperc::TauGrid g = tperc::io::parse_grid(grid);
    auto e = std::make_unique<tperc_estimate>(tperc_estimate{tperc::estimate_tau(batch->batch, p, g), p});
    *out = e.release();
    return TPERC_OK;
  });
}

double tperc_estimate_tau_hat(const tperc_estimate* est) { return est ? est->est.tau_hat : 0.0; }

size_t tperc_estimate_profile_size(const tperc_estimate* est) { return est ? est->est.profile.size() : 0; }

tperc_status tperc_estimate_profile_at(const tperc_estimate* est, size_t i, double* tau, double* log_likelihood) {
  if (!est) return null_arg("est");
  if (i >= est->est.profile.size()) return fail(TPERC_ERR_CONTRACT, "profile index out of range");
  if (tau) *tau = est->est.profile[i].first;
  if (log_likelihood) *log_likelihood = est->est.profile[i].second;
  return TPERC_OK;
}

tperc_status tperc_estimate_write_json(const tperc_estimate* est, const char* path) {
  if (!est) return null_arg("est");
  if (!path) return null_arg("path");
  return guarded([&] {
    tperc::io::write_text(path, tperc::io::estimate_json(est->est, est->params));
    return TPERC_OK;
  });
}

void tperc_estimate_free(tperc_estimate* est) { delete est; }

tperc_status tperc_train(const tperc_config* cfg, const char* out_dir, int* failed_episode) {
  if (!cfg) return null_arg("cfg");
  if (!out_dir) return null_arg("out_dir");
  if (failed_episode) *failed_episode = -1;
  return guarded([&] {
    try {
      cfg->cfg.validate();
    } catch (const tperc::ContractError& e) {
      throw tperc::InputError(std::string("invalid configuration: ") + e.what());
    } catch (const tperc::ParameterDomainError& e) {
      throw tperc::InputError(std::string("invalid configuration: ") + e.what());
    }
    try {
      tperc::io::write_training_outputs(cfg->cfg, out_dir);
    } catch (const tperc::EpisodeAbort& e) {
      if (failed_episode) *failed_episode = e.episode();
      throw;
    }
    return TPERC_OK;
  });
}

tperc_status tperc_sweep(double lambda, double sigma, double sample_dt, size_t channels, const char* grid,
                         const double* true_taus, size_t n_taus, size_t seeds, uint64_t seed, int jobs,
                         const char* out_csv) {
  if (!grid) return null_arg("grid");
  if (!true_taus && n_taus > 0) return null_arg("true_taus");
  if (!out_csv) return null_arg("out_csv");
  return guarded([&] {
    tperc::SweepConfig sc;
    sc.params = {lambda, sigma};
    sc.params.validate();
    sc.sample_dt = sample_dt;
    sc.channels = static_cast<int>(channels);
    sc.grid = tperc::io::parse_grid(grid);
    sc.jobs = jobs;
    std::vector<std::uint64_t> s(seeds);
    for (std::size_t i = 0; i < seeds; ++i) s[i] = tperc::mix64(seed + i);
    const auto rows = tperc::tau_accuracy_sweep(sc, std::vector<double>(true_taus, true_taus + n_taus), s);
    tperc::io::write_text(out_csv, tperc::io::sweep_csv(rows));
    return TPERC_OK;
  });
}

}  // extern "C"
