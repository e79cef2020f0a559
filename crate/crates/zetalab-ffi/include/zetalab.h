#ifndef ZETALAB_H
#define ZETALAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible entry point.
 */
typedef enum ZlStatus {
  ZlStatus_Ok = 0,
  ZlStatus_NullPointer = 1,
  ZlStatus_InvalidArgument = 2,
  /**
   * A hard mathematical check failed (Riemann hypothesis, functional
   * equation, overdetermination).
   */
  ZlStatus_ValidationFailed = 3,
  ZlStatus_BufferTooSmall = 4,
} ZlStatus;

/**
 * Opaque curve zeta handle.
 */
typedef struct ZlCurveZeta ZlCurveZeta;

/**
 * Opaque validated L-function handle.
 */
typedef struct ZlLFunction ZlLFunction;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The last error message from this thread, as a fresh allocation, or NULL
 * when no error has been recorded. Free with zl_string_free.
 */
char *zl_last_error_message(void);

/**
 * Free a string allocated by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a zetalab-ffi function and
 * not yet freed.
 */
void zl_string_free(char *s);

/**
 * Validate an L-function from comma-separated rational coefficients
 * ("1,0,2" or "1,1/2,..."), constant term first. On success writes a new
 * handle to `out`.
 *
 * # Safety
 * `coeffs` must be a NUL-terminated string and `out` a valid pointer.
 */
enum ZlStatus zl_lfunction_new(uint64_t q,
                               uint32_t w,
                               const char *coeffs,
                               bool exact,
                               struct ZlLFunction **out);

/**
 * # Safety
 * `p` must be a handle from zl_lfunction_new, not yet freed.
 */
void zl_lfunction_free(struct ZlLFunction *p);

/**
 * # Safety
 * `p` must be a live handle.
 */
uint64_t zl_lfunction_degree(const struct ZlLFunction *p);

/**
 * The root number, +1 or -1 (0 for a null handle).
 *
 * # Safety
 * `p` must be a live handle.
 */
int32_t zl_lfunction_root_number(const struct ZlLFunction *p);

/**
 * Dirichlet coefficients Lambda_1..Lambda_n as doubles into `out`.
 *
 * # Safety
 * `p` must be a live handle and `out` must point to at least `n` doubles.
 */
enum ZlStatus zl_lfunction_lambdas(const struct ZlLFunction *p, uintptr_t n, double *out);

/**
 * Root angles (theta in (-pi, pi]) and multiplicities. Writes min(cap,
 * count) entries and stores the distinct-root count in `written`; returns
 * BufferTooSmall when cap was insufficient.
 *
 * # Safety
 * `p` must be a live handle; `theta` and `mult` must hold `cap` entries;
 * `written` must be a valid pointer.
 */
enum ZlStatus zl_lfunction_roots(const struct ZlLFunction *p,
                                 double *theta,
                                 uint32_t *mult,
                                 uintptr_t cap,
                                 uintptr_t *written);

/**
 * Reconstruct a curve zeta function from point counts N_1..N_g.
 *
 * # Safety
 * `counts` must point to `genus` values; `out` must be valid.
 */
enum ZlStatus zl_curve_zeta_from_counts(uint64_t q,
                                        uintptr_t genus,
                                        const uint64_t *counts,
                                        struct ZlCurveZeta **out);

/**
 * # Safety
 * `p` must be a handle from zl_curve_zeta_from_counts, not yet freed.
 */
void zl_curve_zeta_free(struct ZlCurveZeta *p);

/**
 * The class number h = P(1) as a decimal string; free with zl_string_free.
 *
 * # Safety
 * `p` must be a live handle.
 */
char *zl_curve_zeta_h(const struct ZlCurveZeta *p);

/**
 * Euler-Kronecker constants gamma^0..gamma^K into `out` (n = K+1 <= 9).
 *
 * # Safety
 * `p` must be a live handle; `out` must hold `n` doubles.
 */
enum ZlStatus zl_curve_zeta_gammas(const struct ZlCurveZeta *p, uintptr_t n, double *out);

/**
 * L-function of the elliptic surface y^2 = x^3 + A(t)x + B(t) over F_{p^e}(t),
 * with A, B as comma-separated coefficient lists (element indices, constant
 * first). Returns a JSON string (n_E, degree, coeffs, omega, lambdas,
 * places), or NULL with the error recorded; free with zl_string_free.
 *
 * # Safety
 * `a` and `b` must be NUL-terminated strings.
 */
char *zl_ell_lfunction_json(uint64_t p, uint32_t e, const char *a, const char *b);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ZETALAB_H */
