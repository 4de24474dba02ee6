#ifndef OPTREC_H
#define OPTREC_H

/* Generated from the Rust sources; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible entry point.
 */
typedef enum OptrecStatus {
  /**
   * Success.
   */
  OPTREC_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  OPTREC_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  OPTREC_STATUS_INVALID_UTF8 = 2,
  /**
   * The instance JSON could not be parsed.
   */
  OPTREC_STATUS_PARSE_ERROR = 3,
  /**
   * The instance is structurally invalid (shapes, budgets, subspace).
   */
  OPTREC_STATUS_INVALID_INSTANCE = 4,
  /**
   * No vector is consistent with the data, or only boundary cases are.
   */
  OPTREC_STATUS_INFEASIBLE = 5,
  /**
   * The solver could not produce a certified answer.
   */
  OPTREC_STATUS_SOLVE_ERROR = 6,
} OptrecStatus;

/**
 * Opaque handle: a validated problem instance plus its derived geometry.
 */
typedef struct OptrecProblem OptrecProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the library version as a static NUL-terminated string.
 */
const char *optrec_version(void);

/**
 * Returns the message from the most recent failure on this thread, or an
 * empty string. The pointer stays valid until the next failing call on the
 * same thread; do not free it.
 */
const char *optrec_last_error(void);

/**
 * Parses and validates an instance from JSON.
 *
 * On success writes a heap-allocated handle through `out` and returns
 * `Ok`; the caller must release it with [`optrec_problem_free`].
 *
 * # Safety
 *
 * `json` must point to a NUL-terminated string and `out` to writable
 * storage for one pointer; both must be non-null.
 */
enum OptrecStatus optrec_problem_parse(const char *json, struct OptrecProblem **out);

/**
 * Releases a handle returned by [`optrec_problem_parse`]. Null is a no-op.
 *
 * # Safety
 *
 * `p` must be a pointer previously returned through
 * [`optrec_problem_parse`] and not freed since.
 */
void optrec_problem_free(struct OptrecProblem *p);

/**
 * Releases a string returned through an out-pointer. Null is a no-op.
 *
 * # Safety
 *
 * `s` must be a string previously returned by this library and not freed
 * since.
 */
void optrec_string_free(char *s);

/**
 * Computes the Chebyshev center and radius for the instance's data vector
 * and writes the JSON report through `out_json`.
 *
 * `method` selects the route: "auto", "eigen", "ball", or "sdp"; pass null
 * for "auto". `tol` is the root-finding tolerance (1e-10 is a good
 * default).
 *
 * # Safety
 *
 * `p` must be a live handle from [`optrec_problem_parse`]; `out_json` must
 * be non-null and writable; `method`, if non-null, must be
 * NUL-terminated. Free the string with [`optrec_string_free`].
 */
enum OptrecStatus optrec_solve_local(const struct OptrecProblem *p,
                                     const char *method,
                                     double tol,
                                     char **out_json);

/**
 * Computes the optimal linear recovery map (or, when `tau` is non-null,
 * the certified map at that trade-off weight) and writes the JSON report
 * through `out_json`.
 *
 * # Safety
 *
 * `p` must be a live handle from [`optrec_problem_parse`]; `out_json` must
 * be non-null and writable; `tau`, if non-null, must point to a readable
 * f64. Free the string with [`optrec_string_free`].
 */
enum OptrecStatus optrec_solve_global(const struct OptrecProblem *p,
                                      const double *tau,
                                      double tol,
                                      char **out_json);

/**
 * Computes the certified worst-case error of a caller-supplied linear
 * recovery map and writes it through `out_value`.
 *
 * `map` is row-major with `N` rows and `m` columns, where `N` is the
 * ambient dimension and `m` the number of observations; it must contain
 * exactly `N * m` doubles.
 *
 * # Safety
 *
 * `p` must be a live handle from [`optrec_problem_parse`]; `map` must
 * point to `N * m` readable doubles; `out_value` must be non-null and
 * writable.
 */
enum OptrecStatus optrec_gwce_upper_bound(const struct OptrecProblem *p,
                                          const double *map,
                                          double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* OPTREC_H */
