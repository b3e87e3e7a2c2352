#ifndef MKDV_UT_H
#define MKDV_UT_H

/* Generated by cbindgen from the mkdv-ut-ffi sources; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes; 2-4 match the exit codes of the command-line tool.
 */
typedef enum {
  MKDV_OK = 0,
  MKDV_NULL_ARGUMENT = 1,
  MKDV_CONFIG_ERROR = 2,
  MKDV_GATE_FAILED = 3,
  MKDV_NUMERICAL_ERROR = 4,
  MKDV_PANIC = 5,
} MkdvStatus;

/**
 * Spectral data with its regularizer and solver options.
 */
typedef struct MkdvProblem MkdvProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * Valid until the next call on the same thread.
 */
const char *mkdv_last_error(void);

/**
 * Build a problem from derived spectral data (the JSON written by the
 * derive stage). `options_json` may be null for defaults; `rho_a` is the
 * pole modulus of the regularizer.
 *
 * # Safety
 * Strings must be NUL-terminated; `out` must be writable.
 */
MkdvStatus mkdv_problem_new(const char *spectral_json,
                            const char *options_json,
                            double rho_a,
                            MkdvProblem **out);

/**
 * # Safety
 * `p` must come from `mkdv_problem_new` and not be used afterwards.
 */
void mkdv_problem_free(MkdvProblem *p);

/**
 * Global-relation and zero-count gate; MKDV_GATE_FAILED when it refuses.
 *
 * # Safety
 * `p` must be a live handle.
 */
MkdvStatus mkdv_problem_gate(const MkdvProblem *p, double gr_threshold);

/**
 * u, u_x, u_xx at (x, t) into `out[0..3]`; `im_u` (nullable) receives
 * the imaginary part left by quadrature.
 *
 * # Safety
 * `p` must be a live handle and `out` hold three doubles.
 */
MkdvStatus mkdv_problem_solve(const MkdvProblem *p, double x, double t, double *out, double *im_u);

/**
 * a(k), b(k) for Im k <= 0 as (re a, im a, re b, im b). `lambda` is +1 or
 * -1; `profile_json` is a profile descriptor as in the config files.
 *
 * # Safety
 * `profile_json` must be NUL-terminated and `out` hold four doubles.
 */
MkdvStatus mkdv_scatter_x(int32_t lambda,
                          const char *profile_json,
                          double l_trunc,
                          double k_re,
                          double k_im,
                          double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MKDV_UT_H */
