#ifndef STATGAMMA_H
#define STATGAMMA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_INVALID_ARGUMENT = 1,
  SG_STATUS_UNSUPPORTED = 2,
  SG_STATUS_NUMERICAL = 3,
  SG_STATUS_NULL_POINTER = 4,
  SG_STATUS_OUT_OF_RANGE = 5,
  SG_STATUS_PANIC = 6,
} SgStatus;

/**
 * Values accepted wherever a process kind is expected.
 */
typedef enum SgProcess {
  SG_PROCESS_AR1 = 0,
  SG_PROCESS_THINNED = 1,
  SG_PROCESS_RANDOM_MEASURE = 2,
  SG_PROCESS_CHANGE_POINT = 3,
  SG_PROCESS_SQUARED_OU = 4,
  SG_PROCESS_CONTINUOUSLY_THINNED = 5,
} SgProcess;

typedef enum SgCirMethod {
  SG_CIR_METHOD_EXACT = 0,
  SG_CIR_METHOD_EULER = 1,
  SG_CIR_METHOD_SQUARED_OU = 2,
} SgCirMethod;

typedef enum SgTestFunction {
  SG_TEST_FUNCTION_IDENTITY = 0,
  SG_TEST_FUNCTION_SQUARE = 1,
  SG_TEST_FUNCTION_EXPONENTIAL = 2,
} SgTestFunction;

/**
 * Simulated ensemble, row-major `n_paths x n_times`.
 */
typedef struct SgEnsemble SgEnsemble;

/**
 * Simulation options; start from [`sg_sim_options_default`].
 */
typedef struct SgSimOptions {
  /**
   * One of `SgCirMethod`.
   */
  uint32_t cir_method;
  /**
   * Longest substep for the Euler and squared-OU methods.
   */
  double dt_sub;
  uint32_t cthin_steps_per_unit_time;
  /**
   * Nonzero: every path starts at `start_value` instead of a stationary draw.
   */
  uint8_t fixed_start;
  double start_value;
} SgSimOptions;

typedef struct SgComplex {
  double re;
  double im;
} SgComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Message describing the most recent failure on this thread, or an empty
 * string. Valid until the next `sg_*` call on the same thread.
 */
const char *sg_last_error(void);

struct SgSimOptions sg_sim_options_default(void);

/**
 * Simulate `n_paths` paths of process `kind` observed at `times[0..n_times]`.
 * `options` may be null for defaults. On success `*out` owns a new handle.
 *
 * # Safety
 * `times` must point to `n_times` readable doubles, `options` must be null
 * or valid, and `out` must be valid for one pointer write.
 */
enum SgStatus sg_simulate(uint32_t kind,
                          double alpha,
                          double beta,
                          double rho,
                          const double *times,
                          size_t n_times,
                          size_t n_paths,
                          uint64_t seed,
                          const struct SgSimOptions *options,
                          struct SgEnsemble **out);

/**
 * Release a handle from [`sg_simulate`]. Null is ignored.
 *
 * # Safety
 * `ensemble` must be null or a live handle that is not used afterwards.
 */
void sg_ensemble_free(struct SgEnsemble *ensemble);

/**
 * # Safety
 * `ensemble` must be null or a live handle.
 */
size_t sg_ensemble_n_paths(const struct SgEnsemble *ensemble);

/**
 * # Safety
 * `ensemble` must be null or a live handle.
 */
size_t sg_ensemble_n_times(const struct SgEnsemble *ensemble);

/**
 * Row-major values, `n_paths * n_times` doubles, owned by the handle.
 *
 * # Safety
 * `ensemble` must be null or a live handle; the pointer dies with it.
 */
const double *sg_ensemble_values(const struct SgEnsemble *ensemble);

/**
 * Copy path `m` into `out[0..len]`; `len` must be at least `n_times`.
 *
 * # Safety
 * `ensemble` must be a live handle and `out` valid for `len` writes.
 */
enum SgStatus sg_ensemble_copy_path(const struct SgEnsemble *ensemble,
                                    size_t m,
                                    double *out,
                                    size_t len);

/**
 * Characteristic function of Ga(alpha, beta) at `omega`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SgStatus sg_gamma_chf(double omega, double alpha, double beta, struct SgComplex *out);

/**
 * Joint chf `E exp(i (s X_0 + t X_1))` of two observations one time unit
 * apart, unit-lag correlation `rho`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SgStatus sg_pair_chf(uint32_t kind,
                          double s,
                          double t,
                          double alpha,
                          double beta,
                          double rho,
                          struct SgComplex *out);

/**
 * Density of `X_{t+dt} = y` given `X_t = x` for the square-root diffusion.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SgStatus sg_cir_transition_density(double y,
                                        double x,
                                        double dt,
                                        double alpha,
                                        double beta,
                                        double rho,
                                        double *out);

/**
 * Generator of `kind` (squared OU or continuously thinned) applied to a
 * test function at `x`. `theta` is read only for the exponential.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SgStatus sg_generator_apply(uint32_t kind,
                                 uint32_t phi,
                                 double theta,
                                 double x,
                                 double alpha,
                                 double beta,
                                 double rho,
                                 double *out);

/**
 * `P[X > u]` for `X ~ Ga(alpha, beta)`.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum SgStatus sg_gamma_survival(double u, double alpha, double beta, double *out);

/**
 * `ln I_q(x)`; NaN outside the domain.
 */
double sg_log_bessel_i(double q, double x);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* STATGAMMA_H */
