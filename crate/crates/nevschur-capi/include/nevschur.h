#ifndef NEVSCHUR_H
#define NEVSCHUR_H

/* Generated by cbindgen from nevschur-capi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes mirrored into the generated header.
 */
typedef enum {
  NS_OK = 0,
  NS_ERR_NULL_POINTER = 1,
  NS_ERR_INVALID_ARGUMENT = 2,
  NS_ERR_NOT_CONTRACTION = 3,
  NS_ERR_NOT_SELFADJOINT = 4,
  NS_ERR_DOMAIN = 5,
  NS_ERR_SINGULAR = 6,
  NS_ERR_MINIMALITY = 7,
  NS_ERR_BUFFER_TOO_SMALL = 8,
  NS_ERR_PARSE = 9,
  NS_ERR_PANIC = 10,
} NsStatus;

/**
 * Kind selector for `ns_transform`.
 */
typedef enum {
  NS_TRANSFORM_PHI = 0,
  NS_TRANSFORM_XI = 1,
  NS_TRANSFORM_PI_A = 2,
  NS_TRANSFORM_ETA = 3,
  NS_TRANSFORM_ZETA = 4,
} NsTransformKind;

/**
 * Opaque passive-system handle.
 */
typedef struct NsSystem NsSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ns_last_error_message(void);

/**
 * Validates a system from `dim x dim` interleaved complex entries.
 *
 * # Safety
 * `entries` must point to `2*dim*dim` doubles; `out` must be valid.
 */
NsStatus ns_system_new(const double *entries,
                       uintptr_t dim,
                       uintptr_t dim_input,
                       bool require_selfadjoint,
                       NsSystem **out);

/**
 * Parses the canonical JSON document format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
NsStatus ns_system_from_json(const char *json, NsSystem **out);

/**
 * Serializes the system into the canonical JSON document. Free the
 * returned string with `ns_string_free`.
 *
 * # Safety
 * `sys` must be a live handle; `out` must be valid.
 */
NsStatus ns_system_to_json(const NsSystem *sys, char **out);

/**
 * # Safety
 * `s` must come from `ns_system_to_json` (or be null).
 */
void ns_string_free(char *s);

/**
 * # Safety
 * `sys` must come from a constructor here (or be null).
 */
void ns_system_free(NsSystem *sys);

/**
 * Seeded random passive selfadjoint system; identical bytes for identical
 * seeds on every platform.
 *
 * # Safety
 * `out` must be valid.
 */
NsStatus ns_system_random(uint64_t seed, uintptr_t dim_input, uintptr_t dim_state, NsSystem **out);

/**
 * Order-N block Jacobi truncation.
 *
 * # Safety
 * `out` must be valid.
 */
NsStatus ns_system_jacobi(uintptr_t n, uintptr_t dim_input, NsSystem **out);

/**
 * # Safety
 * `sys` must be a live handle.
 */
uintptr_t ns_system_dim_input(const NsSystem *sys);

/**
 * # Safety
 * `sys` must be a live handle.
 */
uintptr_t ns_system_dim_state(const NsSystem *sys);

/**
 * Copies the block operator into `buffer` as interleaved doubles.
 *
 * # Safety
 * `buffer` must hold `2*(m+n)^2` doubles.
 */
NsStatus ns_system_matrix(const NsSystem *sys, double *buffer, uintptr_t capacity);

/**
 * Omega(z) at z = re + i im; `buffer` receives an m x m matrix.
 *
 * # Safety
 * `sys` live; `buffer` holds `2*m*m` doubles.
 */
NsStatus ns_transfer(const NsSystem *sys, double re, double im, double *buffer, uintptr_t capacity);

/**
 * Omega'(z); same layout as `ns_transfer`.
 *
 * # Safety
 * As for `ns_transfer`.
 */
NsStatus ns_transfer_derivative(const NsSystem *sys,
                                double re,
                                double im,
                                double *buffer,
                                uintptr_t capacity);

/**
 * Compressed resolvent M(xi) = P_M (T - xi)^{-1} |_M of a selfadjoint
 * system, evaluated off [-1, 1].
 *
 * # Safety
 * As for `ns_transfer`.
 */
NsStatus ns_compressed_resolvent(const NsSystem *sys,
                                 double re,
                                 double im,
                                 double *buffer,
                                 uintptr_t capacity);

/**
 * Realizes a transform of the system; `a` is ignored by the Phi kind.
 *
 * # Safety
 * `sys` live; `out` valid.
 */
NsStatus ns_transform(const NsSystem *sys, NsTransformKind kind, double a, NsSystem **out);

/**
 * Certificate summary: smallest kernel eigenvalue, smallest inequality
 * eigenvalue, largest disk norm, and the verdict.
 *
 * # Safety
 * `sys` live; out pointers valid.
 */
NsStatus ns_certify(const NsSystem *sys,
                    double *min_kernel_eig,
                    double *min_inequality_eig,
                    double *schur_norm_max,
                    bool *verdict);

/**
 * Controllability/observability dimensions and the minimal/simple flags.
 *
 * # Safety
 * `sys` live; out pointers valid.
 */
NsStatus ns_krylov(const NsSystem *sys,
                   uintptr_t *controllable_dim,
                   uintptr_t *observable_dim,
                   bool *minimal,
                   bool *simple);

/**
 * Spectral measure of the bi-inner dilation: writes up to `capacity`
 * atoms as locations plus m x m jump matrices.
 *
 * # Safety
 * `sys` live; `locations` holds `capacity` doubles, `jumps` holds
 * `capacity * 2 * m * m` doubles, `count` valid.
 */
NsStatus ns_spectral_measure(const NsSystem *sys,
                             double *locations,
                             double *jumps,
                             uintptr_t capacity,
                             uintptr_t *count);

/**
 * Operator norm of the block operator; a convenience for binding checks.
 *
 * # Safety
 * `sys` live; `norm` valid.
 */
NsStatus ns_opnorm(const NsSystem *sys, double *norm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEVSCHUR_H */
