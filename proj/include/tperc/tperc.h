#ifndef TPERC_H
#define TPERC_H

/* C interface to the interval-timing library.
 *
 * Every function returns a tperc_status. On failure, tperc_last_error() gives a
 * message for the calling thread. Handles are opaque and owned by the caller.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TPERC_API __declspec(dllexport)
#else
#define TPERC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tperc_status {
  TPERC_OK = 0,
  TPERC_ERR_CONTRACT = 1,     /* invalid argument or precondition */
  TPERC_ERR_INPUT = 2,        /* malformed file, bad config, unwritable path */
  TPERC_NOT_CONVERGED = 3,    /* soft: result still filled in */
  TPERC_ERR_NUMERICAL = 4,    /* ill-conditioned kernel, non-finite objective */
  TPERC_ERR_INTERNAL = 5
} tperc_status;

typedef struct tperc_batch tperc_batch;
typedef struct tperc_config tperc_config;
typedef struct tperc_estimate tperc_estimate;

TPERC_API const char* tperc_version(void);
TPERC_API const char* tperc_last_error(void);
/* Line of the last input error, 0 when unknown. */
TPERC_API size_t tperc_last_error_line(void);

/* ---- sensor batches ---------------------------------------------------- */

/* `samples` rows at t = 0, dt, 2dt, ... */
TPERC_API tperc_status tperc_batch_generate(double lambda, double sigma, size_t samples, double dt,
                                            size_t channels, uint64_t seed, tperc_batch** out);
TPERC_API tperc_status tperc_batch_read_csv(const char* path, tperc_batch** out);
TPERC_API tperc_status tperc_batch_write_csv(const tperc_batch* batch, const char* path);
TPERC_API size_t tperc_batch_channels(const tperc_batch* batch);
TPERC_API size_t tperc_batch_samples(const tperc_batch* batch);
TPERC_API tperc_status tperc_batch_time(const tperc_batch* batch, size_t sample, double* out);
TPERC_API tperc_status tperc_batch_value(const tperc_batch* batch, size_t channel, size_t sample, double* out);
TPERC_API void tperc_batch_free(tperc_batch* batch);

/* ---- configuration ----------------------------------------------------- */

TPERC_API tperc_status tperc_config_new(tperc_config** out);
/* Applies `key = value` lines on top of the current values. */
TPERC_API tperc_status tperc_config_load(tperc_config* cfg, const char* path);
TPERC_API tperc_status tperc_config_set(tperc_config* cfg, const char* key, const char* value);
/* Copies the value into buf (NUL-terminated, truncated to len) and stores the
 * full length in *needed when it is not NULL. */
TPERC_API tperc_status tperc_config_get(const tperc_config* cfg, const char* key, char* buf, size_t len,
                                        size_t* needed);
TPERC_API void tperc_config_free(tperc_config* cfg);

/* ---- hyperparameter fit ------------------------------------------------ */

typedef struct tperc_fit_result {
  double lambda;
  double sigma;
  double log_likelihood;
  int iterations;
  int converged;
} tperc_fit_result;

/* Uses the fit.* keys of cfg (defaults when cfg is NULL). Returns
 * TPERC_NOT_CONVERGED with the best iterate when the iteration budget runs out,
 * and TPERC_ERR_NUMERICAL with the last valid iterate on a numerical failure. */
TPERC_API tperc_status tperc_fit(const tperc_batch* batch, const tperc_config* cfg, tperc_fit_result* out);
TPERC_API tperc_status tperc_fit_write_json(const tperc_fit_result* fit, const char* path);
TPERC_API tperc_status tperc_hyperparams_read_json(const char* path, double* lambda, double* sigma);

/* ---- interval estimate ------------------------------------------------- */

/* grid: "start:step:stop" or "a,b,c". */
TPERC_API tperc_status tperc_estimate_tau(const tperc_batch* batch, double lambda, double sigma, const char* grid,
                                          tperc_estimate** out);
TPERC_API double tperc_estimate_tau_hat(const tperc_estimate* est);
TPERC_API size_t tperc_estimate_profile_size(const tperc_estimate* est);
TPERC_API tperc_status tperc_estimate_profile_at(const tperc_estimate* est, size_t i, double* tau,
                                                 double* log_likelihood);
TPERC_API tperc_status tperc_estimate_write_json(const tperc_estimate* est, const char* path);
TPERC_API void tperc_estimate_free(tperc_estimate* est);

/* ---- experiments ------------------------------------------------------- */

/* Runs the configured experiment and writes episodes.csv, psychometric.csv,
 * tderror.csv, weights.csv, summary.json and manifest.json into out_dir.
 * On TPERC_ERR_NUMERICAL, *failed_episode (if not NULL) holds the episode
 * index, 0 for the calibration fit. */
TPERC_API tperc_status tperc_train(const tperc_config* cfg, const char* out_dir, int* failed_episode);

/* Estimates each true interval with `seeds` independent recordings and writes
 * true_tau,mean_tau_hat,std_tau_hat,runs rows to out_csv. */
TPERC_API tperc_status tperc_sweep(double lambda, double sigma, double sample_dt, size_t channels, const char* grid,
                                   const double* true_taus, size_t n_taus, size_t seeds, uint64_t seed, int jobs,
                                   const char* out_csv);

#ifdef __cplusplus
}
#endif

#endif
