#ifndef KVCERT_H
#define KVCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum KvStatus {
  KV_STATUS_OK = 0,
  /**
   * A required pointer was null.
   */
  KV_STATUS_NULL_POINTER = 1,
  /**
   * An argument was out of range or malformed.
   */
  KV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Inputs violate a precondition of the construction.
   */
  KV_STATUS_PRECONDITION = 3,
  /**
   * A numerical step failed (singular matrix, non-finite values, ...).
   */
  KV_STATUS_NUMERICAL = 4,
  /**
   * Text could not be parsed.
   */
  KV_STATUS_FORMAT = 5,
  /**
   * The library panicked; this is a bug.
   */
  KV_STATUS_PANIC = 6,
} KvStatus;

/**
 * Certified factorization.
 */
typedef struct KvCertificate KvCertificate;

/**
 * Solution `R`, `S` of the factorization problem.
 */
typedef struct KvFlow KvFlow;

/**
 * Square complex matrix.
 */
typedef struct KvMatrix KvMatrix;

/**
 * Formal series truncated at a fixed degree.
 */
typedef struct KvSeries KvSeries;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length, or 0 if none.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes of writes.
 */
size_t kv_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *kv_version(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void kv_string_free(char *s);

/**
 * `log(e^X e^Y)` up to `degree` (2 to 16).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KvStatus kv_bch_series(size_t degree, struct KvSeries **out);

/**
 * Coefficient of `word` (e.g. `"XXY"`).
 *
 * # Safety
 * `series` must be a live handle, `word` a NUL-terminated string, `re` and
 * `im` valid for writes.
 */
enum KvStatus kv_series_coeff(const struct KvSeries *series,
                              const char *word,
                              double *re,
                              double *im);

/**
 * Truncation degree of a series, or 0 for a null handle.
 *
 * # Safety
 * `series` must be null or a live handle.
 */
size_t kv_series_degree(const struct KvSeries *series);

/**
 * Serialize a series to JSON; release with [`kv_string_free`].
 *
 * # Safety
 * `series` must be a live handle and `out` valid for writes.
 */
enum KvStatus kv_series_to_json(const struct KvSeries *series, char **out);

/**
 * # Safety
 * `series` must be null or a handle from this library, not yet freed.
 */
void kv_series_free(struct KvSeries *series);

/**
 * Solve for `R`, `S` up to `degree` (2 to 12); `split` is 0 for the
 * first-letter split, 1 for the symmetric one.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum KvStatus kv_solve(size_t degree, int split, struct KvFlow **out);

/**
 * Copy of `R` (`which` = 0) or `S` (`which` = 1).
 *
 * # Safety
 * `flow` must be a live handle and `out` valid for writes.
 */
enum KvStatus kv_flow_series(const struct KvFlow *flow, int which, struct KvSeries **out);

/**
 * `||e^{x+y} - e^R e^x e^{-R} e^S e^y e^{-S}||` with `||x||, ||y|| <= radius`.
 *
 * # Safety
 * Handles must be live and `residual` valid for writes.
 */
enum KvStatus kv_flow_verify(const struct KvFlow *flow,
                             const struct KvMatrix *x,
                             const struct KvMatrix *y,
                             double radius,
                             double *residual);

/**
 * Serialize a solution to JSON; release with [`kv_string_free`].
 *
 * # Safety
 * `flow` must be a live handle and `out` valid for writes.
 */
enum KvStatus kv_flow_to_json(const struct KvFlow *flow, char **out);

/**
 * # Safety
 * `flow` must be null or a handle from this library, not yet freed.
 */
void kv_flow_free(struct KvFlow *flow);

/**
 * `dim x dim` matrix from row-major real and imaginary parts; `im` may be null.
 *
 * # Safety
 * `re` (and `im` if non-null) must be valid for `dim * dim` reads.
 */
enum KvStatus kv_matrix_new(size_t dim, const double *re, const double *im, struct KvMatrix **out);

/**
 * Entry `(i, j)`.
 *
 * # Safety
 * `m` must be a live handle, `re` and `im` valid for writes.
 */
enum KvStatus kv_matrix_get(const struct KvMatrix *m, size_t i, size_t j, double *re, double *im);

/**
 * Dimension of a matrix, or 0 for a null handle.
 *
 * # Safety
 * `m` must be null or a live handle.
 */
size_t kv_matrix_dim(const struct KvMatrix *m);

/**
 * `p(u, v)` for a series `p`.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum KvStatus kv_series_evaluate(const struct KvSeries *series,
                                 const struct KvMatrix *u,
                                 const struct KvMatrix *v,
                                 struct KvMatrix **out);

/**
 * # Safety
 * `m` must be null or a handle from this library, not yet freed.
 */
void kv_matrix_free(struct KvMatrix *m);

/**
 * `1 + x` for square-zero `x` as a commutator of commutators.
 *
 * # Safety
 * `x` must be a live handle and `out` valid for writes.
 */
enum KvStatus kv_factor_unipotent(const struct KvMatrix *x, struct KvCertificate **out);

/**
 * `[c, d]` as a sum of square-zero matrices.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum KvStatus kv_factor_comm_n2(const struct KvMatrix *c,
                                const struct KvMatrix *d,
                                struct KvCertificate **out);

/**
 * `[c^*, c]` for a contraction `c` as a signed sum of projections, built
 * around the projection `p`.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum KvStatus kv_factor_comm_p(const struct KvMatrix *c,
                               const struct KvMatrix *p,
                               struct KvCertificate **out);

/**
 * Recompute a certificate from its atoms. `pass` is set to 1 or 0.
 *
 * # Safety
 * `cert` must be a live handle; `pass` and `residual` valid for writes.
 */
enum KvStatus kv_certificate_verify(const struct KvCertificate *cert, int *pass, double *residual);

/**
 * Serialize a certificate to JSON; release with [`kv_string_free`].
 *
 * # Safety
 * `cert` must be a live handle and `out` valid for writes.
 */
enum KvStatus kv_certificate_to_json(const struct KvCertificate *cert, char **out);

/**
 * Parse a certificate from JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` valid for writes.
 */
enum KvStatus kv_certificate_from_json(const char *json, struct KvCertificate **out);

/**
 * # Safety
 * `cert` must be null or a handle from this library, not yet freed.
 */
void kv_certificate_free(struct KvCertificate *cert);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KVCERT_H */
