#ifndef SURVTRANS_H
#define SURVTRANS_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum StStatus {
  ST_STATUS_OK = 0,
  ST_STATUS_NULL_POINTER = 1,
  ST_STATUS_INVALID_ARGUMENT = 2,
  ST_STATUS_DIMENSION_MISMATCH = 3,
  ST_STATUS_EMPTY_DATASET = 4,
  ST_STATUS_NO_EVENTS = 5,
  ST_STATUS_SINGULAR_HESSIAN = 6,
  ST_STATUS_UNDEFINED = 7,
  ST_STATUS_SERIALIZATION = 8,
  ST_STATUS_IO = 9,
  ST_STATUS_BUFFER_TOO_SMALL = 10,
  ST_STATUS_PANIC = 11,
} StStatus;

/**
 * Fitted Cox model handle.
 */
typedef struct StCoxModel StCoxModel;

/**
 * Survival dataset handle.
 */
typedef struct StDataset StDataset;

/**
 * Kaplan-Meier curve handle.
 */
typedef struct StKmCurve StKmCurve;

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *st_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *st_version(void);

/**
 * Builds a dataset from column arrays. `covariates` is row-major,
 * `n_rows * n_features` long; `events` holds 0 or 1 per row.
 *
 * # Safety
 * Pointers must be valid for the stated lengths; `out` must be writable.
 */
enum StStatus st_dataset_new(size_t n_rows,
                             size_t n_features,
                             const double *durations,
                             const uint8_t *events,
                             const double *covariates,
                             struct StDataset **out);

/**
 * # Safety
 * `dataset` must come from [`st_dataset_new`] and not be freed twice.
 */
void st_dataset_free(struct StDataset *dataset);

/**
 * Fits a ridge-penalized Cox model with default Newton settings.
 *
 * # Safety
 * `dataset` must be a live handle; `out` must be writable.
 */
enum StStatus st_cox_fit(const struct StDataset *dataset,
                         double penalizer,
                         struct StCoxModel **out);

/**
 * # Safety
 * `model` must come from this library and not be freed twice.
 */
void st_cox_free(struct StCoxModel *model);

/**
 * Number of coefficients, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
size_t st_cox_n_features(const struct StCoxModel *model);

/**
 * Copies coefficients, standard errors and two-sided Wald p-values into
 * caller buffers of length `len`, which must equal the feature count. Any
 * output pointer may be null to skip it.
 *
 * # Safety
 * Non-null buffers must hold `len` doubles.
 */
enum StStatus st_cox_coefficients(const struct StCoxModel *model,
                                  double *beta,
                                  double *standard_errors,
                                  double *p_values,
                                  size_t len);

/**
 * Predicted survival curve for covariates `x`. Writes up to `capacity`
 * points and always sets `out_len` to the full curve length; returns
 * `BufferTooSmall` when `capacity` is insufficient.
 *
 * # Safety
 * `x` must hold `n_features` doubles; `times` and `survival` must hold
 * `capacity` doubles; `out_len` must be writable.
 */
enum StStatus st_cox_predict_survival(const struct StCoxModel *model,
                                      const double *x,
                                      size_t n_features,
                                      double *times,
                                      double *survival,
                                      size_t capacity,
                                      size_t *out_len);

/**
 * `S(t | x)` for one time point.
 *
 * # Safety
 * `x` must hold `n_features` doubles; `out` must be writable.
 */
enum StStatus st_cox_survival_at(const struct StCoxModel *model,
                                 const double *x,
                                 size_t n_features,
                                 double t,
                                 double *out);

/**
 * Serializes the model as JSON. Release the string with [`st_string_free`].
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum StStatus st_cox_to_json(const struct StCoxModel *model, char **out);

/**
 * Restores a model from JSON produced by [`st_cox_to_json`].
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum StStatus st_cox_from_json(const char *json, struct StCoxModel **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void st_string_free(char *s);

/**
 * Kaplan-Meier estimate from `n` durations and 0/1 event flags.
 *
 * # Safety
 * Arrays must hold `n` elements; `out` must be writable.
 */
enum StStatus st_km_fit(const double *durations,
                        const uint8_t *events,
                        size_t n,
                        struct StKmCurve **out);

/**
 * Number of event times on the curve, or 0 for a null handle.
 *
 * # Safety
 * `curve` must be null or a live handle.
 */
size_t st_km_len(const struct StKmCurve *curve);

/**
 * Point `index` of the curve. Any output pointer may be null.
 *
 * # Safety
 * `curve` must be a live handle.
 */
enum StStatus st_km_point(const struct StKmCurve *curve,
                          size_t index,
                          double *time,
                          double *survival,
                          size_t *at_risk,
                          size_t *events);

/**
 * Step-function value `S(t)`.
 *
 * # Safety
 * `curve` must be a live handle; `out` must be writable.
 */
enum StStatus st_km_survival_at(const struct StKmCurve *curve, double t, double *out);

/**
 * # Safety
 * `curve` must come from [`st_km_fit`] and not be freed twice.
 */
void st_km_free(struct StKmCurve *curve);

/**
 * Harrell's concordance index; higher risk means an earlier event.
 *
 * # Safety
 * Arrays must hold `n` elements; `out` must be writable.
 */
enum StStatus st_concordance_index(const double *durations,
                                   const uint8_t *events,
                                   const double *risks,
                                   size_t n,
                                   double *out);

/**
 * Mann-Whitney ROC AUC over 0/1 labels and scores.
 *
 * # Safety
 * Arrays must hold `n` elements; `out` must be writable.
 */
enum StStatus st_roc_auc(const uint8_t *labels, const double *scores, size_t n, double *out);

#endif  /* SURVTRANS_H */
