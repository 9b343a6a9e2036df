#ifndef TRITTER_H
#define TRITTER_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum TritterStatus {
  TRITTER_STATUS_OK = 0,
  TRITTER_STATUS_NULL_POINTER = 1,
  /**
   * An argument is outside its domain (λ, T, mode index, scenario...).
   */
  TRITTER_STATUS_DOMAIN = 2,
  /**
   * Linear algebra failed or produced an inconsistent result.
   */
  TRITTER_STATUS_NUMERIC = 3,
  /**
   * A string argument could not be parsed.
   */
  TRITTER_STATUS_PARSE = 4,
  /**
   * A block needed for a conditional state is singular.
   */
  TRITTER_STATUS_SINGULAR = 5,
  /**
   * No closed form exists for the request.
   */
  TRITTER_STATUS_UNSUPPORTED = 6,
  TRITTER_STATUS_BUFFER_TOO_SMALL = 7,
  TRITTER_STATUS_PANIC = 8,
} TritterStatus;

/**
 * Threshold outcome reported by [`tritter_find_threshold`].
 */
typedef enum TritterThresholdKind {
  /**
   * The measure vanishes below the returned transmissivity.
   */
  TRITTER_THRESHOLD_KIND_AT = 0,
  TRITTER_THRESHOLD_KIND_ALWAYS_PRESENT = 1,
  TRITTER_THRESHOLD_KIND_NEVER_PRESENT = 2,
} TritterThresholdKind;

/**
 * Opaque covariance matrix.
 */
typedef struct TritterCm TritterCm;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *tritter_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *tritter_version(void);

/**
 * Lossless output covariance matrix from its closed form.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum TritterStatus tritter_cm_ideal(double lambda, struct TritterCm **out);

/**
 * Lossless output obtained by applying the tritter to the input state with
 * coherent amplitude `gamma_re + i gamma_im` on mode c.
 *
 * # Safety
 * `out` must be valid for writing a pointer.
 */
enum TritterStatus tritter_cm_transform(double lambda,
                                        double gamma_re,
                                        double gamma_im,
                                        struct TritterCm **out);

/**
 * Covariance matrix from `(2n)²` row-major entries; the matrix is
 * symmetrized.
 *
 * # Safety
 * `data` must point to `len` readable doubles and `out` must be valid for
 * writing a pointer.
 */
enum TritterStatus tritter_cm_from_entries(const double *data, size_t len, struct TritterCm **out);

/**
 * Pure loss with per-mode transmissivities.
 *
 * # Safety
 * `cm` must be a live handle and `out` valid for writing a pointer.
 */
enum TritterStatus tritter_cm_apply_loss(const struct TritterCm *cm,
                                         double t_a,
                                         double t_b,
                                         double t_c,
                                         struct TritterCm **out);

/**
 * Loss scenario `scenario` (1 to 5) at shared transmissivity `t`, with
 * single party `k` and lossy pair member `lossy_member`.
 *
 * # Safety
 * `cm` must be a live handle and `out` valid for writing a pointer.
 */
enum TritterStatus tritter_cm_apply_scenario(const struct TritterCm *cm,
                                             uint8_t scenario,
                                             double t,
                                             uint32_t k,
                                             uint32_t lossy_member,
                                             struct TritterCm **out);

/**
 * Number of modes, or 0 for a null handle.
 *
 * # Safety
 * `cm` must be null or a live handle.
 */
size_t tritter_cm_n_modes(const struct TritterCm *cm);

/**
 * # Safety
 * `cm` must be a live handle and `out` valid for writing a double.
 */
enum TritterStatus tritter_cm_get(const struct TritterCm *cm, size_t row, size_t col, double *out);

/**
 * Copies all entries, row-major, into `buf` of capacity `len`.
 *
 * # Safety
 * `cm` must be a live handle and `buf` valid for writing `len` doubles.
 */
enum TritterStatus tritter_cm_copy_entries(const struct TritterCm *cm, double *buf, size_t len);

/**
 * Releases a handle. Null is ignored.
 *
 * # Safety
 * `cm` must be null or a handle not yet freed.
 */
void tritter_cm_free(struct TritterCm *cm);

/**
 * Ascending symplectic eigenvalues, one per mode, into `buf`.
 *
 * # Safety
 * `cm` must be a live handle and `buf` valid for writing `len` doubles.
 */
enum TritterStatus tritter_symplectic_eigenvalues(const struct TritterCm *cm,
                                                  double *buf,
                                                  size_t len);

/**
 * Logarithmic negativity between mode sets `a` and `b`.
 *
 * # Safety
 * `cm` must be a live handle, `a`/`b` must hold `a_len`/`b_len` indices
 * and `out` must be valid for writing a double.
 */
enum TritterStatus tritter_log_negativity(const struct TritterCm *cm,
                                          const uint32_t *a,
                                          size_t a_len,
                                          const uint32_t *b,
                                          size_t b_len,
                                          double *out);

/**
 * Gaussian steering from mode set `a` to mode set `b`.
 *
 * # Safety
 * As for [`tritter_log_negativity`].
 */
enum TritterStatus tritter_gaussian_steering(const struct TritterCm *cm,
                                             const uint32_t *a,
                                             size_t a_len,
                                             const uint32_t *b,
                                             size_t b_len,
                                             double *out);

/**
 * Closed form of `measure` (e.g. `"S:k->ij"`) for the default roles
 * (k = c, lossy pair member a), unclamped. `scenario` 0 means no loss.
 * `domain_ok` is set to 0 when the expression leaves the real domain.
 *
 * # Safety
 * `measure` must be a NUL-terminated string; `value` and `domain_ok` must
 * be valid for writing.
 */
enum TritterStatus tritter_reference_formula(const char *measure,
                                             uint8_t scenario,
                                             double lambda,
                                             double t,
                                             double *value,
                                             int32_t *domain_ok);

/**
 * Transmissivity below which `measure` vanishes in `scenario` (1 to 5,
 * default roles), searched in `[t_lo, t_hi]`. `t` is written only when
 * `kind` is `TRITTER_THRESHOLD_KIND_AT`.
 *
 * # Safety
 * `measure` must be a NUL-terminated string; `kind` and `t` must be valid
 * for writing.
 */
enum TritterStatus tritter_find_threshold(const char *measure,
                                          uint8_t scenario,
                                          double lambda,
                                          double t_lo,
                                          double t_hi,
                                          enum TritterThresholdKind *kind,
                                          double *t);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRITTER_H */
