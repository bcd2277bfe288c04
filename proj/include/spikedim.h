/* spikedim — intrinsic dimensionality of multichannel time series.
 *
 * C interface to the shared library.  All entry points are thread-safe as
 * long as each handle is used from one thread at a time.  Functions that
 * return a pointer yield NULL on failure; functions that return a status
 * yield 0 on success.  In both cases sd_last_error() describes the failure
 * and sd_last_error_code() classifies it (thread-local, overwritten by the
 * next failing call):
 *
 *   2  data error    (unreadable input, non-finite values, singular noise)
 *   3  model error   (spectrum incompatible with a spiked model)
 *   4  config error  (invalid options)
 */
#ifndef SPIKEDIM_H
#define SPIKEDIM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define SD_OK 0
#define SD_ERR_DATA 2
#define SD_ERR_MODEL 3
#define SD_ERR_CONFIG 4

const char* sd_version(void);

/* Last failure on the calling thread; empty string / SD_OK after success. */
const char* sd_last_error(void);
int sd_last_error_code(void);

/* ---- data matrices (channels x samples) ------------------------------- */

typedef struct sd_data sd_data;

/* values is row-major, channels x samples.  period_ms > 0. */
sd_data* sd_data_create(int64_t channels, int64_t samples,
                        const double* values, double period_ms);
/* format: "csv" or "raw-f64". */
sd_data* sd_data_read(const char* path, const char* format);
int sd_data_write(const sd_data* data, const char* path, const char* format);
int64_t sd_data_channels(const sd_data* data);
int64_t sd_data_samples(const sd_data* data);
/* Copies the matrix, row-major, into out (channels*samples doubles). */
int sd_data_values(const sd_data* data, double* out);
void sd_data_free(sd_data* data);

/* ---- dimensionality estimate ------------------------------------------ */

typedef struct sd_report sd_report;

/* options_json is an object with optional "noise" and "spike" sub-objects;
 * keys and defaults match the CLI (see README).  Pass NULL or "{}" for the
 * defaults: no noise whitening, 100 Monte Carlo draws, gaussian reference
 * distribution, fraction stop rule at 0.4, seed 1. */
sd_report* sd_estimate(const sd_data* data, const char* options_json);

int sd_report_id(const sd_report* report);           /* estimated L        */
double sd_report_spike(const sd_report* report, int group);
int sd_report_group_size(const sd_report* report, int group);
double sd_report_group_mean(const sd_report* report, int group);
double sd_report_bulk(const sd_report* report);      /* bulk noise level   */
double sd_report_gamma(const sd_report* report);     /* channels / samples */
double sd_report_delta(const sd_report* report);
double sd_report_epsilon(const sd_report* report);
double sd_report_epsilon0(const sd_report* report);
double sd_report_epsilon_prime(const sd_report* report);
int64_t sd_report_eigenvalue_count(const sd_report* report);
double sd_report_eigenvalue(const sd_report* report, int64_t rank);
int sd_report_warning_count(const sd_report* report);
/* Returned string lives as long as the report. */
const char* sd_report_warning(const sd_report* report, int index);
void sd_report_free(sd_report* report);

/* ---- building blocks --------------------------------------------------- */

/* Support edges of the white Marchenko-Pastur spectrum. */
int sd_mp_edges(double gamma, double sigma2, double* lower, double* upper);

/* Classical source-count baselines on a descending spectrum (length k,
 * samples t).  Return the selected count, or -1 on error. */
int sd_aic_argmin(const double* eigenvalues, int64_t k, int64_t t);
int sd_mdl_argmin(const double* eigenvalues, int64_t k, int64_t t);
int sd_eif_argmin(const double* eigenvalues, int64_t k, int64_t t);
/* Smallest count whose cumulative variance share reaches fraction. */
int sd_pca_count(const double* eigenvalues, int64_t k, double fraction);

/* Per-channel noise variances.  method: "fft", "residual", "threshold" or
 * "brute".  options_json like the CLI noise options (NULL for defaults).
 * out receives sd_data_channels(data) doubles. */
int sd_noise_variances(const sd_data* data, const char* method,
                       const char* options_json, double* out);

/* ---- whole runs --------------------------------------------------------- */

/* Executes one command ("simulate", "estimate", "compare", "window")
 * described by config_json, writing results plus manifest.json into
 * output_dir.  Returns an exit status (0 / 2 / 3 / 4). */
int sd_run(const char* config_json, const char* output_dir);

/* Re-executes a previous run from its manifest.  If output_dir is NULL the
 * manifest's own directory is reused, reproducing the outputs in place. */
int sd_rerun(const char* manifest_path, const char* output_dir);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPIKEDIM_H */
