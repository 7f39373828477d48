#ifndef GUESSGA_H
#define GUESSGA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum GuessgaStatus {
  GUESSGA_STATUS_OK = 0,
  GUESSGA_STATUS_NULL_POINTER = 1,
  GUESSGA_STATUS_INVALID_ARGUMENT = 2,
  GUESSGA_STATUS_RUNTIME = 3,
  GUESSGA_STATUS_IO = 4,
  GUESSGA_STATUS_PANIC = 5,
} GuessgaStatus;

typedef enum GuessgaPayoff {
  GUESSGA_PAYOFF_QUADRATIC = 0,
  GUESSGA_PAYOFF_WINNER_TAKE_ALL = 1,
} GuessgaPayoff;

/**
 * Opaque result of a batch of trials.
 */
typedef struct GuessgaBatch GuessgaBatch;

/**
 * Opaque run configuration.
 */
typedef struct GuessgaConfig GuessgaConfig;

/**
 * Opaque result of a q-sweep.
 */
typedef struct GuessgaSweep GuessgaSweep;

typedef struct GuessgaSweepPoint {
  double axis_value;
  double mean_final;
  double variance_final;
  size_t n_trials;
} GuessgaSweepPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *guessga_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *guessga_version(void);

/**
 * `-(x - p * xbar)^2`.
 */
double guessga_quadratic_payoff(double x, double p, double xbar);

/**
 * Quadratic fitness of `pool[idx]` against the other `len - 1` members.
 *
 * # Safety
 * `pool` must point to `len` doubles and `out` to one writable double.
 */
enum GuessgaStatus guessga_quadratic_fitness(const double *pool,
                                             size_t len,
                                             size_t idx,
                                             double p,
                                             double *out);

/**
 * Winner-take-all fitness of every pool member.
 *
 * # Safety
 * `pool` must point to `len` doubles and `out` to `len` writable doubles.
 */
enum GuessgaStatus guessga_winner_take_all_fitness(const double *pool,
                                                   size_t len,
                                                   double p,
                                                   double *out);

/**
 * New config holding the built-in defaults.
 */
struct GuessgaConfig *guessga_config_new(void);

/**
 * Parses a JSON config (any subset of fields, or a whole run manifest).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer slot.
 */
enum GuessgaStatus guessga_config_from_json(const char *json, struct GuessgaConfig **out);

/**
 * Serializes the config as canonical JSON. Free the result with
 * [`guessga_string_free`].
 *
 * # Safety
 * `cfg` must be a live config handle or NULL.
 */
char *guessga_config_to_json(const struct GuessgaConfig *cfg);

/**
 * # Safety
 * `s` must come from a guessga function returning an owned string, or be NULL.
 */
void guessga_string_free(char *s);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void guessga_config_free(struct GuessgaConfig *cfg);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_q(struct GuessgaConfig *cfg, double q);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_iterations(struct GuessgaConfig *cfg, size_t iterations);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_n_trials(struct GuessgaConfig *cfg, size_t n_trials);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_seed(struct GuessgaConfig *cfg, uint64_t seed);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_pool_size(struct GuessgaConfig *cfg, size_t pool_size);

/**
 * Mutation probability.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_rho(struct GuessgaConfig *cfg, double rho);

/**
 * Mutation step.
 *
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_epsilon(struct GuessgaConfig *cfg, double epsilon);

/**
 * # Safety
 * `cfg` must be a live config handle.
 */
enum GuessgaStatus guessga_config_set_payoff(struct GuessgaConfig *cfg, enum GuessgaPayoff payoff);

/**
 * Runs `n_trials` seeded trials at the configured q.
 *
 * # Safety
 * `cfg` must be a live config handle and `out` a writable pointer slot.
 */
enum GuessgaStatus guessga_run_batch(const struct GuessgaConfig *cfg, struct GuessgaBatch **out);

/**
 * # Safety
 * `batch` must be a live batch handle and `out` a writable double.
 */
enum GuessgaStatus guessga_batch_mean_final(const struct GuessgaBatch *batch, double *out);

/**
 * Population variance of the per-trial final means.
 *
 * # Safety
 * `batch` must be a live batch handle and `out` a writable double.
 */
enum GuessgaStatus guessga_batch_variance_final(const struct GuessgaBatch *batch, double *out);

/**
 * Number of trials, or 0 for a NULL handle.
 *
 * # Safety
 * `batch` must be a live batch handle or NULL.
 */
size_t guessga_batch_n_trials(const struct GuessgaBatch *batch);

/**
 * Number of iterations per trial, or 0 for a NULL handle.
 *
 * # Safety
 * `batch` must be a live batch handle or NULL.
 */
size_t guessga_batch_iterations(const struct GuessgaBatch *batch);

/**
 * Copies each trial's final mean strategy into `buf` (`len >= n_trials`).
 *
 * # Safety
 * `batch` must be a live batch handle and `buf` point to `len` doubles.
 */
enum GuessgaStatus guessga_batch_final_means(const struct GuessgaBatch *batch,
                                             double *buf,
                                             size_t len);

/**
 * Cross-trial mean of the pool mean at each iteration (`len >= iterations`).
 *
 * # Safety
 * `batch` must be a live batch handle and `buf` point to `len` doubles.
 */
enum GuessgaStatus guessga_batch_mean_trajectory(const struct GuessgaBatch *batch,
                                                 double *buf,
                                                 size_t len);

/**
 * # Safety
 * `batch` must come from this library and not be used afterwards.
 */
void guessga_batch_free(struct GuessgaBatch *batch);

/**
 * One batch per q value. `q_values` may be NULL with `len == 0` to use the
 * config's q-grid.
 *
 * # Safety
 * `cfg` must be a live config handle, `q_values` point to `len` doubles
 * (or be NULL with `len == 0`), and `out` be a writable pointer slot.
 */
enum GuessgaStatus guessga_sweep_q(const struct GuessgaConfig *cfg,
                                   const double *q_values,
                                   size_t len,
                                   struct GuessgaSweep **out);

/**
 * Number of points, or 0 for a NULL handle.
 *
 * # Safety
 * `sweep` must be a live sweep handle or NULL.
 */
size_t guessga_sweep_len(const struct GuessgaSweep *sweep);

/**
 * Point `idx` in ascending axis order.
 *
 * # Safety
 * `sweep` must be a live sweep handle and `out` a writable point.
 */
enum GuessgaStatus guessga_sweep_point(const struct GuessgaSweep *sweep,
                                       size_t idx,
                                       struct GuessgaSweepPoint *out);

/**
 * Writes the sweep as CSV to `path`.
 *
 * # Safety
 * `sweep` must be a live sweep handle and `path` a NUL-terminated string.
 */
enum GuessgaStatus guessga_sweep_write_csv(const struct GuessgaSweep *sweep, const char *path);

/**
 * # Safety
 * `sweep` must come from this library and not be used afterwards.
 */
void guessga_sweep_free(struct GuessgaSweep *sweep);

/**
 * Re-runs the experiment recorded in a manifest. `out_dir` may be NULL to
 * use the directory recorded in the manifest.
 *
 * # Safety
 * `manifest` must be a NUL-terminated string; `out_dir` one or NULL.
 */
enum GuessgaStatus guessga_rerun_manifest(const char *manifest, const char *out_dir);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GUESSGA_H */
