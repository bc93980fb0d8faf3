#ifndef WHICHPATH_H
#define WHICHPATH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WpStatus {
  WP_STATUS_OK = 0,
  WP_STATUS_NULL_POINTER = 1,
  WP_STATUS_INVALID_ARGUMENT = 2,
  WP_STATUS_CONFIG = 3,
  WP_STATUS_NUMERICAL = 4,
  WP_STATUS_IO = 5,
  WP_STATUS_PANIC = 6,
} WpStatus;

typedef enum WpFamily {
  WP_FAMILY_WP_X = 0,
  WP_FAMILY_WP_Z = 1,
  WP_FAMILY_ERASER_X = 2,
  WP_FAMILY_ERASER_Z = 3,
  WP_FAMILY_MZI = 4,
} WpFamily;

typedef enum WpObservable {
  WP_OBSERVABLE_X = 0,
  WP_OBSERVABLE_X0 = 1,
  WP_OBSERVABLE_X1 = 2,
  WP_OBSERVABLE_D = 3,
  WP_OBSERVABLE_DM = 4,
} WpObservable;

typedef enum WpTarget {
  WP_TARGET_MZI_X = 0,
  WP_TARGET_X = 1,
  WP_TARGET_X0 = 2,
  WP_TARGET_X1 = 3,
  WP_TARGET_D = 4,
  WP_TARGET_DM = 5,
} WpTarget;

typedef enum WpTier {
  WP_TIER_IDEAL = 0,
  WP_TIER_CNOT_SQGE = 1,
  WP_TIER_BCNOT2_SQGE = 2,
  WP_TIER_BCNOT5_SQGE = 3,
} WpTier;

typedef enum WpOrdering {
  WP_ORDERING_PLAIN = 0,
  WP_ORDERING_PRIMED = 1,
  WP_ORDERING_DOUBLE_PRIMED = 2,
  WP_ORDERING_TRIPLE_PRIMED = 3,
} WpOrdering;

/**
 * Shot-sampled dataset with its configuration and calibration counts.
 */
typedef struct WpCampaign WpCampaign;

/**
 * Result of a weighted least-squares fit.
 */
typedef struct WpFit WpFit;

/**
 * Exact circuit simulator for a fixed gate-error model.
 */
typedef struct WpSimulator WpSimulator;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *wp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wp_version(void);

/**
 * Creates a simulator. `theta` and `beta` point to five doubles each or are
 * null for error-free gates.
 *
 * # Safety
 * Non-null pointers must be valid for the documented lengths.
 */
enum WpStatus wp_simulator_new(const double *theta, const double *beta, struct WpSimulator **out);

/**
 * # Safety
 * `sim` must come from [`wp_simulator_new`] and not be used afterwards.
 */
void wp_simulator_free(struct WpSimulator *sim);

/**
 * Writes the exact outcome probabilities `p(00), p(01), p(10), p(11)`.
 *
 * # Safety
 * `out` must hold four doubles.
 */
enum WpStatus wp_simulator_probabilities(const struct WpSimulator *sim,
                                         int32_t family_id,
                                         double phi,
                                         double alpha,
                                         double *out);

/**
 * Exact observable value. `degenerate` (may be null) is set when the value
 * is the limit at a zero-probability conditioning point.
 *
 * # Safety
 * Pointers must be valid; `degenerate` may be null.
 */
enum WpStatus wp_simulator_observable(const struct WpSimulator *sim,
                                      int32_t family_id,
                                      int32_t observable_id,
                                      double phi,
                                      double alpha,
                                      double *value,
                                      bool *degenerate);

/**
 * Biased CNOT as a row-major 4×4 matrix split into real and imaginary parts.
 *
 * # Safety
 * `beta` holds five doubles; `re` and `im` hold sixteen each.
 */
enum WpStatus wp_bcnot_matrix(const double *beta,
                              int32_t ordering_id,
                              bool two_terms,
                              double *re,
                              double *im);

/**
 * Estimate and standard error of an observable from counts `n00, n01, n10, n11`.
 *
 * # Safety
 * `counts` holds four integers; outputs must be valid.
 */
enum WpStatus wp_estimate(int32_t observable_id,
                          const uint64_t *counts,
                          double *value,
                          double *std_error);

/**
 * Wald-Wolfowitz runs test on the signs of `n` values.
 *
 * # Safety
 * `values` holds `n` doubles; outputs must be valid.
 */
enum WpStatus wp_runs_test(const double *values,
                           size_t n,
                           size_t *runs,
                           double *z,
                           double *p_value);

/**
 * Loads a TOML config (or a dataset's `manifest.json`) and runs the campaign.
 *
 * # Safety
 * `path` is a NUL-terminated UTF-8 string; `out` must be valid.
 */
enum WpStatus wp_campaign_run(const char *path, struct WpCampaign **out);

/**
 * Reads a dataset directory written by [`wp_campaign_write`] or the CLI.
 *
 * # Safety
 * `dir` is a NUL-terminated UTF-8 string; `out` must be valid.
 */
enum WpStatus wp_campaign_read(const char *dir, struct WpCampaign **out);

/**
 * # Safety
 * `campaign` must be valid; `dir` is a NUL-terminated UTF-8 string.
 */
enum WpStatus wp_campaign_write(const struct WpCampaign *campaign, const char *dir);

/**
 * Readout-mitigated copy of a campaign.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WpStatus wp_campaign_mitigate(const struct WpCampaign *campaign, struct WpCampaign **out);

/**
 * Number of grid points in the campaign.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WpStatus wp_campaign_points(const struct WpCampaign *campaign, size_t *points);

/**
 * # Safety
 * `campaign` must come from this library and not be used afterwards.
 */
void wp_campaign_free(struct WpCampaign *campaign);

/**
 * Fits the model of `target` at `tier` to the campaign with default options.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WpStatus wp_fit_campaign(const struct WpCampaign *campaign,
                              int32_t target_id,
                              int32_t tier_id,
                              struct WpFit **out);

/**
 * Number of free parameters of a fit.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WpStatus wp_fit_param_count(const struct WpFit *fit, size_t *count);

/**
 * Value and standard error of free parameter `index`. `name` (may be null)
 * receives up to `name_len` bytes of the NUL-terminated parameter name.
 *
 * # Safety
 * Pointers must be valid; `name` must hold `name_len` bytes.
 */
enum WpStatus wp_fit_param(const struct WpFit *fit,
                           size_t index,
                           double *value,
                           double *std_error,
                           char *name,
                           size_t name_len);

/**
 * Reduced chi-square of a fit.
 *
 * # Safety
 * Pointers must be valid.
 */
enum WpStatus wp_fit_chi2_red(const struct WpFit *fit, double *chi2_red);

/**
 * # Safety
 * `fit` must come from this library and not be used afterwards.
 */
void wp_fit_free(struct WpFit *fit);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WHICHPATH_H */
