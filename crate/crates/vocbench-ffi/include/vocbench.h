#ifndef VOCBENCH_H
#define VOCBENCH_H

/* Generated with cbindgen:0.27.0 */

/* Generated by cbindgen from the vocbench-ffi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result class of an FFI call.
typedef enum {
  // Success.
  VB_STATUS_OK = 0,
  // Input could not be read or parsed (file access, malformed text).
  VB_STATUS_PARSE_ERROR = 1,
  // Input parsed but violates a data invariant (bad field, empty
  // dataset, out-of-domain argument).
  VB_STATUS_DATA_ERROR = 2,
  // Internal failure; should not happen.
  VB_STATUS_INTERNAL_ERROR = 3,
  // A required pointer argument was null.
  VB_STATUS_NULL_ARGUMENT = 4,
} VbStatus;

// Opaque handle to a loaded prediction dataset.
typedef struct VbDataset VbDataset;

// Opaque handle to a VOC curve.
typedef struct VbVocCurve VbVocCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the most recent failure on this thread, or null if none.
// Valid until the next failing call on the same thread.
const char *vb_last_error_message(void);

// Loads a prediction CSV (`confidence,predicted,label[,weight]`).
//
// # Safety
// `path` must point to a NUL-terminated string; `out` must be valid for a
// pointer write.
VbStatus vb_dataset_load_csv(const char *path, VbDataset **out);

// Builds a dataset from parallel arrays of length `len`. `weight` may be
// null for unit weights.
//
// # Safety
// Non-null array arguments must point to `len` readable elements; `out`
// must be valid for a pointer write.
VbStatus vb_dataset_from_arrays(const double *confidence,
                                const uint32_t *predicted,
                                const uint32_t *label,
                                const double *weight,
                                size_t len,
                                VbDataset **out);

// Releases a dataset handle. Null is a no-op.
//
// # Safety
// `dataset` must be null or a pointer returned by a `vb_dataset_*`
// constructor that has not been freed.
void vb_dataset_free(VbDataset *dataset);

// Number of records, or 0 for a null handle.
//
// # Safety
// `dataset` must be null or a live dataset handle.
size_t vb_dataset_len(const VbDataset *dataset);

// Total weight, or NaN for a null handle.
//
// # Safety
// `dataset` must be null or a live dataset handle.
double vb_dataset_total_weight(const VbDataset *dataset);

// Weighted accuracy.
//
// # Safety
// `dataset` must be a live dataset handle; `out` must be writable.
VbStatus vb_accuracy(const VbDataset *dataset, double *out);

// Expected calibration error over `n_bins` equal-width bins.
//
// # Safety
// `dataset` must be a live dataset handle; `out` must be writable.
VbStatus vb_ece(const VbDataset *dataset, size_t n_bins, double *out);

// Discrimination statistic; the high/low component outputs may be null.
//
// # Safety
// `dataset` must be a live dataset handle; non-null out-pointers must be
// writable.
VbStatus vb_discrimination(const VbDataset *dataset,
                           double *out_discrimination,
                           double *out_high_component,
                           double *out_low_component);

// Value-optimal acceptance threshold at penalty `omega`. All out-pointers
// may be null.
//
// # Safety
// `dataset` must be a live dataset handle; non-null out-pointers must be
// writable.
VbStatus vb_optimize_threshold(const VbDataset *dataset,
                               double omega,
                               double *out_threshold,
                               double *out_value,
                               double *out_accepted_weight);

// Calibrated-classifier threshold ω/(ω+1).
//
// # Safety
// `out` must be writable.
VbStatus vb_calibrated_threshold(double omega, double *out);

// Builds the penalty-aware VOC curve (upper envelope over thresholds).
//
// # Safety
// `dataset` must be a live dataset handle; `out` must be valid for a
// pointer write.
VbStatus vb_voc_omega_aware(const VbDataset *dataset, VbVocCurve **out);

// Builds the fixed-threshold VOC line of a dataset.
//
// # Safety
// `dataset` must be a live dataset handle; `out` must be valid for a
// pointer write.
VbStatus vb_voc_fixed(const VbDataset *dataset, double threshold, VbVocCurve **out);

// Releases a curve handle. Null is a no-op.
//
// # Safety
// `curve` must be null or a pointer returned by a `vb_voc_*` constructor
// that has not been freed.
void vb_voc_free(VbVocCurve *curve);

// Curve value at penalty `omega`.
//
// # Safety
// `curve` must be a live curve handle; `out` must be writable.
VbStatus vb_voc_evaluate(const VbVocCurve *curve, double omega, double *out);

// Largest penalty with positive value; `INFINITY` when the curve stays
// positive forever.
//
// # Safety
// `curve` must be a live curve handle; `out` must be writable.
VbStatus vb_voc_omega_sup(const VbVocCurve *curve, double *out);

// Area under the positive part of the curve over `[lo, hi)`; `hi` may be
// `INFINITY`. Writes `INFINITY` when the area diverges.
//
// # Safety
// `curve` must be a live curve handle; `out` must be writable.
VbStatus vb_voc_auc(const VbVocCurve *curve, double lo, double hi, double *out);

// Number of affine pieces in the curve, or 0 for a null handle.
//
// # Safety
// `curve` must be null or a live curve handle.
size_t vb_voc_piece_count(const VbVocCurve *curve);

// Reads one curve piece: the half-open ω interval start, the line
// coefficients (value = a − b·ω), and the realizing threshold. All
// out-pointers may be null.
//
// # Safety
// `curve` must be a live curve handle; non-null out-pointers must be
// writable.
VbStatus vb_voc_piece(const VbVocCurve *curve,
                      size_t index,
                      double *out_omega_start,
                      double *out_intercept_a,
                      double *out_slope_b,
                      double *out_threshold);

// Checks whether `lhs` dominates `rhs` (value at least as high everywhere)
// over `[lo, hi)`; `hi` may be `INFINITY`. When domination fails and
// `out_witness_omega` is non-null, a penalty where `rhs` is strictly
// better is written there; on domination it is set to NaN.
//
// # Safety
// `lhs` and `rhs` must be live curve handles; non-null out-pointers must
// be writable.
VbStatus vb_voc_dominates(const VbVocCurve *lhs,
                          const VbVocCurve *rhs,
                          double lo,
                          double hi,
                          bool *out_dominates,
                          double *out_witness_omega);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VOCBENCH_H */
