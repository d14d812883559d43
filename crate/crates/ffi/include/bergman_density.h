#ifndef BERGMAN_DENSITY_H
#define BERGMAN_DENSITY_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum BdStatus {
  BD_STATUS_OK = 0,
  BD_STATUS_NULL_POINTER = 1,
  BD_STATUS_DOMAIN = 2,
  BD_STATUS_POLE = 3,
  BD_STATUS_QUADRATURE = 4,
  BD_STATUS_NOT_POSITIVE_DEFINITE = 5,
  BD_STATUS_SINGULAR = 6,
  BD_STATUS_OVERFLOW = 7,
  BD_STATUS_INVALID_ARGUMENT = 8,
  BD_STATUS_PANIC = 9,
} BdStatus;

/**
 * Opaque model geometry.
 */
typedef struct BdGeometry BdGeometry;

/**
 * Opaque bordered Gram matrix.
 */
typedef struct BdGram BdGram;

/**
 * One density evaluation.
 */
typedef struct BdDensityReport {
  uint64_t m;
  double rho;
  double density;
  double lo;
  double hi;
  double reference;
  double remainder;
  double budget_c;
} BdDensityReport;

/**
 * `I_00` from the bordering formula.
 */
typedef struct BdSchur {
  double value;
  double excess;
  double spread;
  double lo;
  double hi;
} BdSchur;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *bd_last_error_message(void);

/**
 * Create the model geometry of scalar curvature `rho`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum BdStatus bd_geometry_new(double rho, struct BdGeometry **out);

/**
 * Restrict the chart to `|z| < cap`.
 *
 * # Safety
 * `geom` must come from [`bd_geometry_new`] and not be freed.
 */
enum BdStatus bd_geometry_set_radius_cap(struct BdGeometry *geom, double cap);

/**
 * # Safety
 * `geom` is null or came from [`bd_geometry_new`] and was not freed before.
 */
void bd_geometry_free(struct BdGeometry *geom);

/**
 * Radius of the chart; infinity when unbounded.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_geometry_max_radius(const struct BdGeometry *geom, double *out);

/**
 * `g(z)`.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_metric_density(const struct BdGeometry *geom, double re, double im, double *out);

/**
 * `a(z)`.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_bundle_weight(const struct BdGeometry *geom, double re, double im, double *out);

/**
 * Finite-difference residual of `g^-1 d dbar log g + rho` with step `h`.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_curvature_residual(const struct BdGeometry *geom,
                                    double re,
                                    double im,
                                    double h,
                                    double *out);

/**
 * `lambda_p^-2` over `|z| <= radius` by adaptive quadrature.
 * `abs_err` may be null.
 *
 * # Safety
 * `geom` is a live geometry handle, `value` is writable, `abs_err` is null or writable.
 */
enum BdStatus bd_lambda_inv_sq(const struct BdGeometry *geom,
                               uint64_t m,
                               uint32_t p,
                               double radius,
                               double rel_tol,
                               double *value,
                               double *abs_err);

/**
 * `lambda_0^-2` on the truncation disk in closed form.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_lambda0_closed_form(const struct BdGeometry *geom, uint64_t m, double *out);

/**
 * `m + rho / 2`.
 */
double bd_expansion_reference(uint64_t m, double rho);

/**
 * Density at the base point with the default trailing degrees.
 *
 * # Safety
 * `geom` is a live geometry handle, `out` is writable.
 */
enum BdStatus bd_density_estimate(const struct BdGeometry *geom,
                                  uint64_t m,
                                  double budget_c,
                                  double rel_tol,
                                  struct BdDensityReport *out);

/**
 * Sphere-model density at `z`: the analytic value `m + 1` and the term-by-term sum.
 *
 * # Safety
 * `analytic` and `summed` are writable.
 */
enum BdStatus bd_cp1_density(uint64_t m, double re, double im, double *analytic, double *summed);

/**
 * Gram matrix of the truncated sections of degrees `0, 1, degrees...`.
 * Passing `n_degrees == 0` uses the default trailing degrees.
 *
 * # Safety
 * `geom` is a live geometry handle, `degrees` points to `n_degrees` values
 * (or is null when `n_degrees == 0`), `out` is writable.
 */
enum BdStatus bd_gram_assemble(const struct BdGeometry *geom,
                               uint64_t m,
                               const uint32_t *degrees,
                               size_t n_degrees,
                               double budget_c,
                               double rel_tol,
                               struct BdGram **out);

/**
 * Gram matrix from row-major entries given as interleaved `(re, im)` pairs,
 * `2 * dim * dim` doubles. `budgets` holds `dim * dim` values or is null for zero budgets.
 *
 * # Safety
 * `entries` and `budgets` (when non-null) are readable for the stated lengths, `out` is writable.
 */
enum BdStatus bd_gram_from_entries(size_t dim,
                                   const double *entries,
                                   const double *budgets,
                                   struct BdGram **out);

/**
 * # Safety
 * `gram` is null or came from a `bd_gram_*` constructor and was not freed before.
 */
void bd_gram_free(struct BdGram *gram);

/**
 * Dimension of the matrix, or 0 for a null handle.
 *
 * # Safety
 * `gram` is null or a live Gram handle.
 */
size_t bd_gram_dim(const struct BdGram *gram);

/**
 * # Safety
 * `gram` is a live Gram handle, `out` is writable.
 */
enum BdStatus bd_gram_schur_i00(const struct BdGram *gram, struct BdSchur *out);

/**
 * `(F^-1)_00` by a dense LU solve.
 *
 * # Safety
 * `gram` is a live Gram handle, `out` is writable.
 */
enum BdStatus bd_gram_inverse00(const struct BdGram *gram, double *out);

/**
 * `I_00` through Cholesky orthonormalization.
 *
 * # Safety
 * `gram` is a live Gram handle, `out` is writable.
 */
enum BdStatus bd_gram_orthonormalize_i00(const struct BdGram *gram, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BERGMAN_DENSITY_H */
