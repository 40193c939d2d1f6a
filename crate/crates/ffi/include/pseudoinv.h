#ifndef PSEUDOINV_H
#define PSEUDOINV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PseudoinvStatus {
  PSEUDOINV_STATUS_OK = 0,
  PSEUDOINV_STATUS_NULL_POINTER = 1,
  PSEUDOINV_STATUS_INVALID_ARGUMENT = 2,
  PSEUDOINV_STATUS_CONFIG = 3,
  PSEUDOINV_STATUS_VALIDITY_WINDOW = 4,
  PSEUDOINV_STATUS_NUMERICAL = 5,
  PSEUDOINV_STATUS_PANIC = 6,
} PseudoinvStatus;

/**
 * Opaque solution handle.
 */
typedef struct PseudoinvSolution PseudoinvSolution;

typedef struct PseudoinvComplex {
  double re;
  double im;
} PseudoinvComplex;

/**
 * η-moments at one time.
 */
typedef struct PseudoinvMoments {
  double t;
  double x_re;
  double x_im;
  double p_re;
  double p_im;
  double dx;
  double dp;
  double product;
  double norm;
} PseudoinvMoments;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer is
 * valid until the next failing call on the same thread.
 */
const char *pseudoinv_last_error_message(void);

/**
 * Reference scenario: m = 1, f = cos t, a0 = 1, b0 = 2, d = 1, x0 = p0 = 1.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for a handle.
 */
enum PseudoinvStatus pseudoinv_solution_new_reference(struct PseudoinvSolution **out);

/**
 * Builds a solution from TOML text in the command-line config format.
 * Table profiles resolve relative to the working directory.
 *
 * # Safety
 * `config` must be a nul-terminated string; `out` must be writable.
 */
enum PseudoinvStatus pseudoinv_solution_new_from_config(const char *config,
                                                        struct PseudoinvSolution **out);

/**
 * Releases a handle. NULL is ignored.
 *
 * # Safety
 * `solution` must come from a `pseudoinv_solution_new_*` call and not be
 * used afterwards.
 */
void pseudoinv_solution_free(struct PseudoinvSolution *solution);

/**
 * Horizon T of the solution's time grid.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PseudoinvStatus pseudoinv_solution_horizon(const struct PseudoinvSolution *solution,
                                                double *out);

/**
 * Closed-form packet `Ψ(x, t)` in the non-Hermitian picture.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PseudoinvStatus pseudoinv_solution_packet(const struct PseudoinvSolution *solution,
                                               double x,
                                               double t,
                                               struct PseudoinvComplex *out);

/**
 * Physical density `|ρΨ(x, t)|²`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PseudoinvStatus pseudoinv_solution_density(const struct PseudoinvSolution *solution,
                                                double x,
                                                double t,
                                                double *out);

/**
 * Closed-form η-moments at `t`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PseudoinvStatus pseudoinv_solution_moments(const struct PseudoinvSolution *solution,
                                                double t,
                                                struct PseudoinvMoments *out);

/**
 * Closed-form PT overlap `∫φ_{λ′}φ_λ dx` at `t`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum PseudoinvStatus pseudoinv_solution_pt_inner_product(const struct PseudoinvSolution *solution,
                                                         double lambda_prime,
                                                         double lambda,
                                                         double t,
                                                         struct PseudoinvComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PSEUDOINV_H */
