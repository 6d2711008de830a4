#ifndef RIDGEPREC_H
#define RIDGEPREC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define RP_ESTIMATOR_ARCHETYPE_1 0

#define RP_ESTIMATOR_ARCHETYPE_2 1

#define RP_ESTIMATOR_ALT_1 2

#define RP_ESTIMATOR_ALT_2 3

#define RP_TARGET_ZERO 0

#define RP_TARGET_IDENTITY 1

/**
 * `value · I`.
 */
#define RP_TARGET_SCALAR 2

/**
 * Inverse diagonal of the sample covariance.
 */
#define RP_TARGET_DEFAULT_DIAGONAL 3

/**
 * The matrix handle in `RpTarget::matrix`.
 */
#define RP_TARGET_MATRIX 4

#define RP_SCHEME_KFOLD 0

#define RP_SCHEME_LOOCV 1

#define RP_SCHEME_APPROX_LOOCV 2

/**
 * Result code of every fallible call.
 */
typedef enum RpStatus {
  RP_OK = 0,
  RP_ERR_NULL_POINTER = 1,
  RP_ERR_INVALID_ARGUMENT = 2,
  RP_ERR_INVALID_MATRIX = 3,
  RP_ERR_NOT_POSITIVE_DEFINITE = 4,
  RP_ERR_INVALID_PENALTY = 5,
  RP_ERR_INVALID_TARGET = 6,
  RP_ERR_INSUFFICIENT_DATA = 7,
  RP_ERR_NUMERIC = 8,
  RP_ERR_PANIC = 9,
} RpStatus;

/**
 * Opaque fitted estimate.
 */
typedef struct RpEstimate RpEstimate;

/**
 * Opaque symmetric matrix.
 */
typedef struct RpMatrix RpMatrix;

/**
 * Precision-side target description.
 */
typedef struct RpTarget {
  /**
   * One of the `RP_TARGET_*` constants.
   */
  uint32_t kind;
  /**
   * Scalar for `RP_TARGET_SCALAR`, ignored otherwise.
   */
  double value;
  /**
   * Matrix for `RP_TARGET_MATRIX`, ignored otherwise.
   */
  const struct RpMatrix *matrix;
} RpTarget;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a `p × p` symmetric matrix from `p²` row-major values. Entries
 * mirrored across the diagonal may differ by at most 1e-9.
 */
enum RpStatus rp_matrix_new(size_t p, const double *row_major, struct RpMatrix **out);

/**
 * Order of the matrix, 0 for a null handle.
 */
size_t rp_matrix_order(const struct RpMatrix *m);

/**
 * Copies the `p²` row-major entries into `out`, which holds `len` doubles.
 */
enum RpStatus rp_matrix_copy(const struct RpMatrix *m, double *out, size_t len);

void rp_matrix_free(struct RpMatrix *m);

/**
 * Divisor-`n` sample covariance of `n × p` row-major data.
 */
enum RpStatus rp_sample_cov(const double *data,
                            size_t n,
                            size_t p,
                            bool center,
                            struct RpMatrix **out);

/**
 * Fits estimator `kind` to covariance `s` at `lambda` on the estimator's own scale.
 * A null `target` means the identity.
 */
enum RpStatus rp_fit(uint32_t kind,
                     const struct RpMatrix *s,
                     const struct RpTarget *target,
                     double lambda,
                     struct RpEstimate **out);

/**
 * New handle holding the precision estimate.
 */
enum RpStatus rp_estimate_omega(const struct RpEstimate *e, struct RpMatrix **out);

/**
 * New handle holding the covariance estimate.
 */
enum RpStatus rp_estimate_sigma(const struct RpEstimate *e, struct RpMatrix **out);

void rp_estimate_free(struct RpEstimate *e);

/**
 * Approximate leave-one-out score of `n × p` row-major data at `lambda`.
 */
enum RpStatus rp_approx_loocv(const double *data,
                              size_t n,
                              size_t p,
                              uint32_t kind,
                              const struct RpTarget *target,
                              double lambda,
                              double *out);

/**
 * Grid minimizer of the chosen cross-validation score.
 *
 * `grid_len = 0` selects the default grid. `k` is only read for
 * `RP_SCHEME_KFOLD`.
 */
enum RpStatus rp_select_lambda(const double *data,
                               size_t n,
                               size_t p,
                               uint32_t kind,
                               const struct RpTarget *target,
                               uint32_t scheme,
                               size_t k,
                               uint64_t fold_seed,
                               const double *grid,
                               size_t grid_len,
                               double *lambda_star);

/**
 * Partial correlation matrix of a positive definite precision matrix.
 */
enum RpStatus rp_partial_corr(const struct RpMatrix *omega, struct RpMatrix **out);

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call into this library from the same thread.
 */
const char *rp_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *rp_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RIDGEPREC_H */
