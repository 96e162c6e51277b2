#ifndef WECS_H
#define WECS_H

/* Generated by cbindgen from wecs-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a fallible call. `WECS_STATUS_OK` is zero; everything else
 * leaves a description in [`wecs_last_error_message`].
 */
enum WecsStatus
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  WECS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  WECS_STATUS_NULL_ARGUMENT = 1,
  /**
   * A parameter was out of range or otherwise unusable.
   */
  WECS_STATUS_BAD_PARAM = 2,
  /**
   * Unknown wavelet basis name.
   */
  WECS_STATUS_BAD_BASIS = 3,
  /**
   * Decomposition level infeasible for the image dimensions.
   */
  WECS_STATUS_BAD_LEVEL = 4,
  /**
   * Non-finite or negative pixel data.
   */
  WECS_STATUS_BAD_DATA = 5,
  /**
   * Buffer or image dimensions disagree with the handle.
   */
  WECS_STATUS_SHAPE_MISMATCH = 6,
  /**
   * Too little data, or every site degenerate.
   */
  WECS_STATUS_DEGENERATE = 7,
  /**
   * Input domain does not match what the operation needs.
   */
  WECS_STATUS_BAD_DOMAIN = 8,
  /**
   * Results were requested before a successful `wecs_analyzer_screen`.
   */
  WECS_STATUS_NOT_READY = 9,
  /**
   * The implementation panicked; state may be stale but not corrupt.
   */
  WECS_STATUS_INTERNAL = 10,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum WecsStatus WecsStatus;
#else
typedef uint32_t WecsStatus;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Which temporal series a getter refers to.
 */
enum WecsSeries
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  /**
   * Squared deviation from the temporal mean; length n.
   */
  WECS_SERIES_D = 0,
  /**
   * Squared transition between consecutive times; length n - 1.
   */
  WECS_SERIES_T = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum WecsSeries WecsSeries;
#else
typedef uint32_t WecsSeries;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Which selection mask a getter refers to.
 */
enum WecsMaskSource
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  WECS_MASK_SOURCE_D = 0,
  WECS_MASK_SOURCE_T = 1,
  /**
   * Sites selected by either series.
   */
  WECS_MASK_SOURCE_UNION = 2,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum WecsMaskSource WecsMaskSource;
#else
typedef uint32_t WecsMaskSource;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque accumulation and screening state behind the C interface.
 */
typedef struct WecsAnalyzer WecsAnalyzer;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Version of the underlying library, as a static NUL-terminated string.
 */
const char *wecs_version(void);

/**
 * Description of the most recent failure on this thread, or an empty
 * string. The pointer stays valid until the next failing call on the
 * same thread.
 */
const char *wecs_last_error_message(void);

/**
 * Create an analyzer for `rows x cols` images transformed with the named
 * wavelet `basis` ("haar", "db2", "db4", "sym2", "sym4", "sym8", "coif4")
 * at the given approximation `level`, under the named `boundary` handling
 * ("periodic", "symmetric", "auto").
 *
 * With `apply_log` true each pushed image is treated as raw non-negative
 * intensity and log-transformed after clamping to `log_floor`; pass false
 * to push pre-transformed values as-is.
 *
 * Returns null on failure; see [`wecs_last_error_message`]. A non-null
 * handle must be released exactly once with [`wecs_analyzer_free`].
 */
struct WecsAnalyzer *wecs_analyzer_new(const char *basis,
                                       uintptr_t level,
                                       const char *boundary,
                                       uintptr_t rows,
                                       uintptr_t cols,
                                       bool apply_log,
                                       double log_floor);

/**
 * Release a handle from [`wecs_analyzer_new`]. Null is a no-op.
 */
void wecs_analyzer_free(struct WecsAnalyzer *analyzer);

/**
 * Append one image of `len == rows * cols` row-major pixels to the stack.
 * Invalidates any previous screening results.
 */
WecsStatus wecs_analyzer_push_image(struct WecsAnalyzer *analyzer,
                                    const double *pixels,
                                    uintptr_t len);

/**
 * Report the number of images pushed so far and the coefficient grid
 * dimensions. Any output pointer may be null to skip that value.
 */
WecsStatus wecs_analyzer_dims(const struct WecsAnalyzer *analyzer,
                              uintptr_t *n_images,
                              uintptr_t *grid_rows,
                              uintptr_t *grid_cols);

/**
 * Run the full screen over the images pushed so far: deviation and
 * transition series per site, correlation against each change signal,
 * the two quantile masks plus their union, and flagged change times.
 *
 * `quantile` is the selection quantile in [0, 1); `time_k` scales the
 * median-absolute-deviation rule for flagging change times.
 */
WecsStatus wecs_analyzer_screen(struct WecsAnalyzer *analyzer, double quantile, double time_k);

/**
 * Length of the requested change signal: n for the deviation series,
 * n - 1 for the transition series.
 */
WecsStatus wecs_analyzer_signal_len(const struct WecsAnalyzer *analyzer,
                                    uint32_t kind,
                                    uintptr_t *len);

/**
 * Copy the requested change signal into `out`, which must hold exactly
 * the length reported by [`wecs_analyzer_signal_len`].
 */
WecsStatus wecs_analyzer_change_signal(const struct WecsAnalyzer *analyzer,
                                       uint32_t kind,
                                       double *out,
                                       uintptr_t len);

/**
 * Copy the requested correlation map into `out`, row-major over the
 * coefficient grid; `len` must equal `grid_rows * grid_cols`. Degenerate
 * (zero-variance) sites carry 0.
 */
WecsStatus wecs_analyzer_correlation(const struct WecsAnalyzer *analyzer,
                                     uint32_t kind,
                                     double *out,
                                     uintptr_t len);

/**
 * Copy the requested selection mask into `out` as 0/1 bytes, row-major
 * over the coefficient grid; `len` must equal `grid_rows * grid_cols`.
 * If `count` is non-null it receives the number of selected sites.
 */
WecsStatus wecs_analyzer_mask(const struct WecsAnalyzer *analyzer,
                              uint32_t source,
                              uint8_t *out,
                              uintptr_t len,
                              uintptr_t *count);

/**
 * Resolved |R| threshold of the d or t mask. The union mask is the join
 * of two selections and has no single threshold, so asking for it is an
 * error.
 */
WecsStatus wecs_analyzer_mask_threshold(const struct WecsAnalyzer *analyzer,
                                        uint32_t source,
                                        double *out);

/**
 * Flagged change times for the requested series, as 1-based time indices.
 * Writes at most `cap` entries to `out` and stores the total count in
 * `total`; call with `cap == 0` (out may be null) to query the count.
 */
WecsStatus wecs_analyzer_flagged_times(const struct WecsAnalyzer *analyzer,
                                       uint32_t kind,
                                       uintptr_t *out,
                                       uintptr_t cap,
                                       uintptr_t *total);

/**
 * Robust statistics behind the time flags: median, median absolute
 * deviation, and the resulting threshold median + k * MAD. Any output
 * pointer may be null to skip that value.
 */
WecsStatus wecs_analyzer_time_stats(const struct WecsAnalyzer *analyzer,
                                    uint32_t kind,
                                    double *median,
                                    double *mad,
                                    double *threshold);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WECS_H */
