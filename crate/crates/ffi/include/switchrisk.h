#ifndef SWITCHRISK_H
#define SWITCHRISK_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code of every fallible call.
 */
typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_PARAMETER = 2,
  SR_STATUS_INVALID_INPUT = 3,
  SR_STATUS_NUMERICAL = 4,
  SR_STATUS_RESOURCE_LIMIT = 5,
  SR_STATUS_DATA = 6,
  SR_STATUS_IO = 7,
  SR_STATUS_JSON = 8,
  SR_STATUS_UTF8 = 9,
  SR_STATUS_PANIC = 10,
} SrStatus;

/**
 * Opaque regression sample.
 */
typedef struct SrDataset SrDataset;

/**
 * Opaque fitted model, with the target scaling of its training data.
 */
typedef struct SrModel SrModel;

/**
 * Terms of a risk bound; `clamped_total = min(raw_total, 1)`.
 */
typedef struct SrBoundReport {
  double empirical_risk;
  double control_term;
  double confidence_term;
  double raw_total;
  double clamped_total;
} SrBoundReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. Free it with
 * `sr_string_free`.
 */
char *sr_last_error(void);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void sr_string_free(char *s);

/**
 * Builds a sample from row-major inputs `xs` (`n * d` values) and targets
 * `ys` (`n` values). Targets are used as given.
 *
 * # Safety
 * `xs` and `ys` must point to `n * d` and `n` readable doubles.
 */
enum SrStatus sr_dataset_new(const double *xs,
                             const double *ys,
                             size_t n,
                             size_t d,
                             struct SrDataset **out_dataset);

/**
 * Reads a `x1,...,xd,y` CSV file and rescales its targets onto
 * `[-1/2, 1/2]`.
 *
 * # Safety
 * `path` must be a NUL-terminated string.
 */
enum SrStatus sr_dataset_from_csv(const char *path, struct SrDataset **out_dataset);

/**
 * Number of samples; 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t sr_dataset_len(const struct SrDataset *dataset);

/**
 * Input dimension; 0 for NULL.
 *
 * # Safety
 * `dataset` must be NULL or a live handle.
 */
size_t sr_dataset_dim(const struct SrDataset *dataset);

/**
 * # Safety
 * `dataset` must be NULL or a handle not yet freed.
 */
void sr_dataset_free(struct SrDataset *dataset);

/**
 * Fits a switching linear model with `modes` components by alternating
 * least squares. `restarts = 0` uses the default. `out_objective` may be
 * NULL.
 *
 * # Safety
 * `dataset` must be a live handle; out-pointers must be writable.
 */
enum SrStatus sr_fit_switching_linear(const struct SrDataset *dataset,
                                      size_t modes,
                                      uint64_t seed,
                                      size_t restarts,
                                      struct SrModel **out_model,
                                      double *out_objective);

/**
 * Fits a PWS model with a linear classifier and linear components.
 *
 * # Safety
 * As for `sr_fit_switching_linear`.
 */
enum SrStatus sr_fit_pws(const struct SrDataset *dataset,
                         size_t modes,
                         uint64_t seed,
                         size_t restarts,
                         struct SrModel **out_model,
                         double *out_objective);

/**
 * Parses a model from JSON (a bare model or a `fit` report).
 *
 * # Safety
 * `json` must be a NUL-terminated string.
 */
enum SrStatus sr_model_from_json(const char *json, struct SrModel **out_model);

/**
 * Serializes a model to JSON. Free the string with `sr_string_free`.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum SrStatus sr_model_to_json(const struct SrModel *model, char **out_json);

/**
 * Number of modes; 0 for NULL.
 *
 * # Safety
 * `model` must be NULL or a live handle.
 */
size_t sr_model_modes(const struct SrModel *model);

/**
 * Empirical ℓp risk of the clipped model on `dataset` (switching risk for
 * switching models).
 *
 * # Safety
 * Both handles must be live; `out_risk` must be writable.
 */
enum SrStatus sr_model_risk(const struct SrModel *model,
                            const struct SrDataset *dataset,
                            double p,
                            double *out_risk);

/**
 * # Safety
 * `model` must be NULL or a handle not yet freed.
 */
void sr_model_free(struct SrModel *model);

/**
 * Evaluates a risk formula given as JSON, e.g.
 * `{"formula":"switching-linear","p":2,"r_x":1,"r_w":1}`.
 *
 * # Safety
 * `formula_json` must be a NUL-terminated string; `out_report` writable.
 */
enum SrStatus sr_bound_evaluate(const char *formula_json,
                                double empirical_risk,
                                size_t modes,
                                size_t n,
                                double delta,
                                struct SrBoundReport *out_report);

/**
 * `emp + 2pC R_x R_w / √n + √(ln(1/δ) / 2n)`.
 *
 * # Safety
 * `out_report` must be writable.
 */
enum SrStatus sr_risk_bound_switching_linear(double empirical_risk,
                                             double p,
                                             size_t modes,
                                             double r_x,
                                             double r_w,
                                             size_t n,
                                             double delta,
                                             struct SrBoundReport *out_report);

/**
 * `R_x R_w / √n`.
 *
 * # Safety
 * `out_value` must be writable.
 */
enum SrStatus sr_rademacher_linear_bound(double r_x, double r_w, size_t n, double *out_value);

/**
 * Chained Rademacher bound of the switching loss class with linear
 * components.
 *
 * # Safety
 * `out_value` must be writable.
 */
enum SrStatus sr_rad_bound_switching_linear_chained(size_t modes,
                                                    size_t d,
                                                    double p,
                                                    double r_x,
                                                    double r_w,
                                                    size_t n,
                                                    double *out_value);

/**
 * Chained Rademacher bound of the switching loss class with RKHS-ball
 * components.
 *
 * # Safety
 * `out_value` must be writable.
 */
enum SrStatus sr_rad_bound_switching_kernel(size_t modes,
                                            double p,
                                            double r_x,
                                            double r_h,
                                            size_t n,
                                            double *out_value);

/**
 * Rademacher bound of a PWS class with RKHS-ball components.
 *
 * # Safety
 * `out_value` must be writable.
 */
enum SrStatus sr_rad_bound_pws_kernel(size_t modes,
                                      size_t d,
                                      double r_x,
                                      double r_h,
                                      size_t n,
                                      double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWITCHRISK_H */
