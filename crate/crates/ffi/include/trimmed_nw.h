#ifndef TRIMMED_NW_H
#define TRIMMED_NW_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum TnwStatus {
  TNW_STATUS_OK = 0,
  TNW_STATUS_NULL_POINTER = 1,
  TNW_STATUS_INVALID_ARGUMENT = 2,
  TNW_STATUS_EMPTY_KERNEL_WINDOW = 3,
  TNW_STATUS_DEGENERATE_TRIM = 4,
  TNW_STATUS_UNSUPPORTED_POINT = 5,
  TNW_STATUS_NO_BREAKDOWN = 6,
  TNW_STATUS_NUMERICAL = 7,
  TNW_STATUS_PANIC = 8,
} TnwStatus;

typedef enum TnwKernel {
  TNW_KERNEL_EPANECHNIKOV = 0,
  TNW_KERNEL_UNIFORM = 1,
  TNW_KERNEL_TRIANGULAR = 2,
} TnwKernel;

typedef enum TnwCovariate {
  TNW_COVARIATE_UNIFORM01 = 0,
  TNW_COVARIATE_BETA22 = 1,
} TnwCovariate;

typedef enum TnwPlacement {
  TNW_PLACEMENT_UPPER_TAIL = 0,
  TNW_PLACEMENT_KERNEL_WINDOW = 1,
} TnwPlacement;

// Opaque paired sample.
typedef struct TnwSample TnwSample;

typedef struct TnwEstimate {
  double value;
  double alpha;
  size_t n_retained;
  double denominator_mass;
  double bandwidth;
} TnwEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies `len` pairs into a new sample handle.
//
// # Safety
// `xs` and `ys` must point to `len` readable doubles; `out` must be writable.
enum TnwStatus tnw_sample_new(const double *xs,
                              const double *ys,
                              size_t len,
                              struct TnwSample **out);

// # Safety
// `sample` must come from `tnw_sample_new` and not be freed twice.
void tnw_sample_free(struct TnwSample *sample);

// Number of pairs, or 0 for a null handle.
//
// # Safety
// `sample` must be null or a live handle.
size_t tnw_sample_len(const struct TnwSample *sample);

// Trimmed estimate at `x0`. `bandwidth == 0` selects `n^{-1/2}/2`.
//
// # Safety
// `sample` must be a live handle; `out` must be writable.
enum TnwStatus tnw_trimmed_nw(const struct TnwSample *sample,
                              double x0,
                              double alpha,
                              enum TnwKernel kernel,
                              double support,
                              double bandwidth,
                              struct TnwEstimate *out);

// # Safety
// `out` must be writable.
enum TnwStatus tnw_t_alpha(enum TnwCovariate law,
                           size_t approx_n,
                           double alpha,
                           double x,
                           double *out);

// # Safety
// `out` must be writable.
enum TnwStatus tnw_asymptotic_efficiency(enum TnwCovariate law,
                                         size_t approx_n,
                                         double alpha,
                                         double x,
                                         double *out);

// Smallest number of contaminated pairs that breaks the estimator.
//
// # Safety
// `sample` must be a live handle; `out_m_star` must be writable.
enum TnwStatus tnw_breakdown_point(const struct TnwSample *sample,
                                   double x0,
                                   double alpha,
                                   enum TnwKernel kernel,
                                   double support,
                                   double bandwidth,
                                   double magnitude,
                                   double threshold,
                                   enum TnwPlacement placement,
                                   size_t *out_m_star);

// Message for the last failed call on this thread; empty after a success.
// Valid until the next library call on the same thread.
const char *tnw_last_error_message(void);

const char *tnw_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIMMED_NW_H */
