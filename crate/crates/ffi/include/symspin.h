#ifndef SYMSPIN_H
#define SYMSPIN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call.
 */
typedef enum SymspinStatus {
  SYMSPIN_STATUS_OK = 0,
  SYMSPIN_STATUS_NULL_POINTER = 1,
  SYMSPIN_STATUS_INVALID_ARGUMENT = 2,
  SYMSPIN_STATUS_MODEL_ERROR = 3,
  SYMSPIN_STATUS_NUMERICAL_ERROR = 4,
  SYMSPIN_STATUS_IO_ERROR = 5,
  SYMSPIN_STATUS_PANIC = 6,
} SymspinStatus;

/**
 * Killing spinor certificate.
 */
typedef struct SymspinCertificate SymspinCertificate;

/**
 * Truncated Fock model.
 */
typedef struct SymspinModel SymspinModel;

/**
 * Spinor in a truncated Fock model.
 */
typedef struct SymspinSpinor SymspinSpinor;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *symspin_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *symspin_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void symspin_string_free(char *s);

/**
 * Creates a model with half-dimension `l` and `cutoff` levels per mode.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SymspinStatus symspin_model_new(uintptr_t l, uintptr_t cutoff, struct SymspinModel **out);

/**
 * # Safety
 * `model` must come from `symspin_model_new` or be null.
 */
void symspin_model_free(struct SymspinModel *model);

/**
 * Number of basis spinors, `cutoff^l`.
 *
 * # Safety
 * `model` and `out` must be valid pointers.
 */
enum SymspinStatus symspin_model_dim(const struct SymspinModel *model, uintptr_t *out);

/**
 * Hermite basis spinor with the given per-mode levels (`len` must equal `l`).
 *
 * # Safety
 * `levels` must point to `len` values; `out` must be valid.
 */
enum SymspinStatus symspin_spinor_basis(const struct SymspinModel *model,
                                        const uintptr_t *levels,
                                        uintptr_t len,
                                        struct SymspinSpinor **out);

/**
 * Parses `{l, cutoff, coeffs: [[re, im], ...]}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid.
 */
enum SymspinStatus symspin_spinor_from_json(const char *json, struct SymspinSpinor **out);

/**
 * Serializes a spinor; release the result with `symspin_string_free`.
 *
 * # Safety
 * `spinor` and `out` must be valid pointers.
 */
enum SymspinStatus symspin_spinor_to_json(const struct SymspinSpinor *spinor, char **out);

/**
 * Copies the coefficients as interleaved `re, im` pairs into `buf`, which
 * must hold `2 * dim` doubles.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum SymspinStatus symspin_spinor_coeffs(const struct SymspinSpinor *spinor,
                                         double *buf,
                                         uintptr_t len);

/**
 * Clifford multiplication by the vector with `len = 2l` frame coefficients.
 *
 * # Safety
 * `vector` must point to `len` doubles; `out` must be valid.
 */
enum SymspinStatus symspin_clifford_apply(const struct SymspinSpinor *spinor,
                                          const double *vector,
                                          uintptr_t len,
                                          struct SymspinSpinor **out);

/**
 * # Safety
 * `spinor` must come from this library or be null.
 */
void symspin_spinor_free(struct SymspinSpinor *spinor);

/**
 * Sphere Killing numbers for `σ = (1/r) I` as a JSON array.
 *
 * # Safety
 * `out` must be valid.
 */
enum SymspinStatus symspin_sphere_spectrum_json(double radius,
                                                uintptr_t count,
                                                uintptr_t cutoff,
                                                char **out);

/**
 * Flat-space rigidity certificate.
 *
 * # Safety
 * `out` must be valid.
 */
enum SymspinStatus symspin_killing_flat(uintptr_t l,
                                        uintptr_t cutoff,
                                        uintptr_t nodes_per_axis,
                                        struct SymspinCertificate **out);

/**
 * Round-sphere nonexistence certificate.
 *
 * # Safety
 * `out` must be valid.
 */
enum SymspinStatus symspin_killing_sphere(double radius,
                                          uintptr_t n_max,
                                          uintptr_t theta_nodes,
                                          uintptr_t fourier_modes,
                                          struct SymspinCertificate **out);

/**
 * Certificate kind: 0 existence, 1 nonexistence, 2 rigidity.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SymspinStatus symspin_certificate_kind(const struct SymspinCertificate *cert, int32_t *out);

/**
 * Bound and verdict of a certificate.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SymspinStatus symspin_certificate_verdict(const struct SymspinCertificate *cert,
                                               double *bound,
                                               bool *verdict);

/**
 * Certificate as JSON; release with `symspin_string_free`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum SymspinStatus symspin_certificate_to_json(const struct SymspinCertificate *cert, char **out);

/**
 * # Safety
 * `cert` must come from this library or be null.
 */
void symspin_certificate_free(struct SymspinCertificate *cert);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMSPIN_H */
