/* C ABI for the lemlab random-lemniscate library. */

#ifndef LEMLAB_H
#define LEMLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum LemlabStatus {
  LEMLAB_STATUS_OK = 0,
  LEMLAB_STATUS_NULL_POINTER = 1,
  LEMLAB_STATUS_INVALID_INPUT = 2,
  LEMLAB_STATUS_NUMERICAL_FAILURE = 3,
  LEMLAB_STATUS_BUFFER_TOO_SMALL = 4,
  LEMLAB_STATUS_IO_ERROR = 5,
} LemlabStatus;

/**
 * Root-sampling law selector.
 */
typedef enum LemlabFamily {
  LEMLAB_FAMILY_UNIFORM_DISK = 0,
  LEMLAB_FAMILY_UNIFORM_CIRCLE = 1,
} LemlabFamily;

/**
 * Opaque handle to a solved critical set.
 */
typedef struct LemlabCriticalSet LemlabCriticalSet;

/**
 * Opaque handle to a root-form polynomial.
 */
typedef struct LemlabPolynomial LemlabPolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent failure on this thread, or NULL if none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *lemlab_last_error_message(void);

/**
 * Library version as a static NUL-terminated string; do not free.
 */
const char *lemlab_version(void);

/**
 * Build a polynomial from parallel arrays of root coordinates.
 *
 * # Safety
 * `re` and `im` must point to `len` readable doubles; `out` must be a valid
 * location for one pointer.
 */
enum LemlabStatus lemlab_poly_from_roots(const double *re,
                                         const double *im,
                                         uintptr_t len,
                                         struct LemlabPolynomial **out);

/**
 * Sample a polynomial with i.i.d. roots from the chosen ensemble.
 *
 * # Safety
 * `out` must be a valid location for one pointer.
 */
enum LemlabStatus lemlab_poly_sample(enum LemlabFamily family,
                                     double r,
                                     uintptr_t n,
                                     uint64_t master_seed,
                                     uint64_t trial_index,
                                     struct LemlabPolynomial **out);

/**
 * # Safety
 * `poly` must come from a lemlab constructor and not already be freed.
 */
void lemlab_poly_free(struct LemlabPolynomial *poly);

/**
 * Degree (root count). Zero on a null handle.
 *
 * # Safety
 * `poly` must be a live handle or null.
 */
uintptr_t lemlab_poly_degree(const struct LemlabPolynomial *poly);

/**
 * Copy root coordinates into caller buffers of capacity `cap`.
 *
 * # Safety
 * `out_re`/`out_im` must hold at least `cap` doubles.
 */
enum LemlabStatus lemlab_poly_roots(const struct LemlabPolynomial *poly,
                                    double *out_re,
                                    double *out_im,
                                    uintptr_t cap);

/**
 * log|P(z)|; -inf when z is a root bit-for-bit, NaN on a null handle.
 *
 * # Safety
 * `poly` must be a live handle or null.
 */
double lemlab_poly_log_abs(const struct LemlabPolynomial *poly, double re, double im);

/**
 * Solve all n-1 critical points.
 *
 * # Safety
 * `poly` must be a live handle; `out` a valid location for one pointer.
 */
enum LemlabStatus lemlab_critical_solve(const struct LemlabPolynomial *poly,
                                        struct LemlabCriticalSet **out);

/**
 * # Safety
 * `cps` must come from `lemlab_critical_solve` and not already be freed.
 */
void lemlab_critical_free(struct LemlabCriticalSet *cps);

/**
 * Number of critical points in the set.
 *
 * # Safety
 * `cps` must be a live handle or null.
 */
uintptr_t lemlab_critical_count(const struct LemlabCriticalSet *cps);

/**
 * Copy critical-point coordinates into caller buffers of capacity `cap`.
 *
 * # Safety
 * `out_re`/`out_im` must hold at least `cap` doubles.
 */
enum LemlabStatus lemlab_critical_points(const struct LemlabCriticalSet *cps,
                                         double *out_re,
                                         double *out_im,
                                         uintptr_t cap);

/**
 * Exact component count through the critical values.
 *
 * # Safety
 * All handles live; `out_count`/`out_degenerate` valid for one write each.
 */
enum LemlabStatus lemlab_count_exact(const struct LemlabPolynomial *poly,
                                     const struct LemlabCriticalSet *cps,
                                     double tol,
                                     uintptr_t *out_count,
                                     bool *out_degenerate);

/**
 * Grid flood-fill component count with refinement up to
 * `target_resolution`.
 *
 * # Safety
 * `poly` live; `out_count`/`out_unstable` valid for one write each.
 */
enum LemlabStatus lemlab_count_grid(const struct LemlabPolynomial *poly,
                                    uintptr_t target_resolution,
                                    uintptr_t *out_count,
                                    bool *out_unstable);

/**
 * Number of roots certified as isolated components at r = n^{-6}.
 *
 * # Safety
 * `poly` live; `out` valid for one write.
 */
enum LemlabStatus lemlab_count_isolated(const struct LemlabPolynomial *poly, uintptr_t *out);

/**
 * Closed-form logarithmic potential of the (family, r) ensemble at z.
 */
double lemlab_potential(enum LemlabFamily family, double r, double re, double im);

/**
 * Cauchy transform of the (family, r) ensemble at z.
 *
 * # Safety
 * `out_re`/`out_im` valid for one write each.
 */
enum LemlabStatus lemlab_cauchy_transform(enum LemlabFamily family,
                                          double r,
                                          double re,
                                          double im,
                                          double *out_re,
                                          double *out_im);

/**
 * Extract the lemniscate contours and write an SVG to `path`.
 *
 * # Safety
 * `poly` live; `path` a NUL-terminated UTF-8 string.
 */
enum LemlabStatus lemlab_render_svg(const struct LemlabPolynomial *poly,
                                    uintptr_t resolution,
                                    const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEMLAB_H */
