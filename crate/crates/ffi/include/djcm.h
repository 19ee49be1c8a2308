#ifndef DJCM_H
#define DJCM_H

/* Generated by cbindgen. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum DjcmMethod {
  DJCM_METHOD_ANALYTIC = 0,
  DJCM_METHOD_ORACLE = 1,
} DjcmMethod;

/**
 * Time-series observables accepted by [`djcm_trajectory_observable`].
 */
typedef enum DjcmObservable {
  DJCM_OBSERVABLE_POPULATIONS = 0,
  DJCM_OBSERVABLE_INVERSION = 1,
  DJCM_OBSERVABLE_G2 = 2,
  DJCM_OBSERVABLE_ENTROPY = 3,
  DJCM_OBSERVABLE_MANDEL_Q = 4,
  DJCM_OBSERVABLE_SQUEEZING = 5,
} DjcmObservable;

typedef enum DjcmStatus {
  DJCM_STATUS_OK = 0,
  DJCM_STATUS_NULL_POINTER = 1,
  DJCM_STATUS_INVALID_ARGUMENT = 2,
  DJCM_STATUS_INVALID_PARAMS = 3,
  DJCM_STATUS_COMPUTATION_FAILED = 4,
  DJCM_STATUS_BUFFER_TOO_SMALL = 5,
  DJCM_STATUS_PANIC = 6,
} DjcmStatus;

typedef struct DjcmHusimiGrid DjcmHusimiGrid;

typedef struct DjcmTrajectory DjcmTrajectory;

/**
 * Model constants. `chi == 0` selects the undeformed oscillator.
 */
typedef struct DjcmParams {
  double omega_cavity;
  double omega_levels[3];
  double g1;
  double g2;
  double omega_e;
  double chi;
  uint32_t sector_n;
} DjcmParams;

typedef struct DjcmComplex {
  double re;
  double im;
} DjcmComplex;

/**
 * Version string of the library. Static, never free it.
 */
const char *djcm_version(void);

/**
 * Copies the last error message of the calling thread into `buf`,
 * truncated and NUL terminated. Returns the length the full message needs
 * including the terminator, 0 when there is no error.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t djcm_last_error(char *buf, size_t len);

/**
 * Fills `out` with the shared constants of the reference parameter rows
 * (sector 1).
 *
 * # Safety
 * `out` must be null or point to a writable `DjcmParams`.
 */
enum DjcmStatus djcm_params_reference(double omega_e,
                                      double g1,
                                      double g2,
                                      double chi,
                                      struct DjcmParams *out);

/**
 * Roots of the characteristic cubic, ascending by imaginary part.
 *
 * # Safety
 * `params` must point to a valid `DjcmParams`, `out_roots` to three
 * writable `DjcmComplex`.
 */
enum DjcmStatus djcm_cubic_roots(const struct DjcmParams *params, struct DjcmComplex *out_roots);

/**
 * Evolves one sector on `samples` points covering scaled time
 * `[0, tau_max]`. `initial` holds `c1, c2, c3` or is null for the excited
 * state `|2,n>`. On success `*out` owns a new trajectory.
 *
 * # Safety
 * `params` must point to a valid `DjcmParams`, `initial` must be null or
 * point to three `DjcmComplex`, `out` must point to a writable pointer.
 */
enum DjcmStatus djcm_solve(const struct DjcmParams *params,
                           const struct DjcmComplex *initial,
                           double tau_max,
                           size_t samples,
                           bool force_oracle,
                           struct DjcmTrajectory **out);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `traj` must be null or a live handle from [`djcm_solve`].
 */
size_t djcm_trajectory_len(const struct DjcmTrajectory *traj);

/**
 * # Safety
 * `traj` must be a live handle from [`djcm_solve`], `out` a writable
 * `DjcmMethod`.
 */
enum DjcmStatus djcm_trajectory_method(const struct DjcmTrajectory *traj, enum DjcmMethod *out);

/**
 * Largest `| |c1|^2 + |c2|^2 + |c3|^2 - 1 |` over the samples.
 *
 * # Safety
 * `traj` must be a live handle from [`djcm_solve`], `out` a writable double.
 */
enum DjcmStatus djcm_trajectory_norm_drift(const struct DjcmTrajectory *traj, double *out);

/**
 * Scaled sample times. `out` needs [`djcm_trajectory_len`] entries.
 *
 * # Safety
 * `traj` must be a live handle, `out` must point to `len` writable doubles.
 */
enum DjcmStatus djcm_trajectory_tau(const struct DjcmTrajectory *traj, double *out, size_t len);

/**
 * Amplitudes `c1, c2, c3` per sample, sample-major. `out` needs three
 * entries per sample.
 *
 * # Safety
 * `traj` must be a live handle, `out` must point to `len` writable
 * `DjcmComplex`.
 */
enum DjcmStatus djcm_trajectory_amplitudes(const struct DjcmTrajectory *traj,
                                           struct DjcmComplex *out,
                                           size_t len);

/**
 * Number of values per row for a `DjcmObservable`, 0 when unknown.
 */
size_t djcm_observable_columns(uint32_t kind);

/**
 * Evaluates a `DjcmObservable` along the trajectory. Samples where the
 * observable is undefined are skipped, so `*out_rows` may be less than the
 * trajectory length. `tau` receives one entry per row, `values` holds
 * `rows * djcm_observable_columns(kind)` entries row-major. Both buffers
 * must fit the full trajectory length.
 *
 * # Safety
 * `traj` must be a live handle, `tau` and `values` must point to
 * `tau_len` and `values_len` writable doubles, `out_rows` to a writable
 * `size_t`.
 */
enum DjcmStatus djcm_trajectory_observable(const struct DjcmTrajectory *traj,
                                           uint32_t kind,
                                           double *tau,
                                           size_t tau_len,
                                           double *values,
                                           size_t values_len,
                                           size_t *out_rows);

/**
 * # Safety
 * `traj` must be null or a handle from [`djcm_solve`] not yet freed.
 */
void djcm_trajectory_free(struct DjcmTrajectory *traj);

/**
 * Husimi Q of the field on a square `[-range, range]^2` grid with
 * `resolution` points per axis at scaled time `tau`, starting from the
 * excited state. With `all_sectors` the sectors `0..=n_max` are summed,
 * `n_max == 0` picking the default truncation for the grid.
 *
 * # Safety
 * `params` must point to a valid `DjcmParams`, `out` to a writable pointer.
 */
enum DjcmStatus djcm_husimi(const struct DjcmParams *params,
                            double tau,
                            double range,
                            size_t resolution,
                            bool all_sectors,
                            uint32_t n_max,
                            struct DjcmHusimiGrid **out);

/**
 * Points per axis, 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle from [`djcm_husimi`].
 */
size_t djcm_husimi_resolution(const struct DjcmHusimiGrid *grid);

/**
 * Highest sector included, 0 for a null handle.
 *
 * # Safety
 * `grid` must be null or a live handle from [`djcm_husimi`].
 */
uint32_t djcm_husimi_n_max(const struct DjcmHusimiGrid *grid);

/**
 * Axis coordinates, `resolution` entries each.
 *
 * # Safety
 * `grid` must be a live handle, `x` and `y` must point to `len` writable
 * doubles.
 */
enum DjcmStatus djcm_husimi_axes(const struct DjcmHusimiGrid *grid,
                                 double *x,
                                 double *y,
                                 size_t len);

/**
 * Q values row-major, `values[iy * resolution + ix]`.
 *
 * # Safety
 * `grid` must be a live handle, `out` must point to `len` writable doubles.
 */
enum DjcmStatus djcm_husimi_values(const struct DjcmHusimiGrid *grid, double *out, size_t len);

/**
 * Trapezoidal integral of Q over the grid.
 *
 * # Safety
 * `grid` must be a live handle, `out` a writable double.
 */
enum DjcmStatus djcm_husimi_integral(const struct DjcmHusimiGrid *grid, double *out);

/**
 * # Safety
 * `grid` must be null or a handle from [`djcm_husimi`] not yet freed.
 */
void djcm_husimi_free(struct DjcmHusimiGrid *grid);

#endif  /* DJCM_H */
