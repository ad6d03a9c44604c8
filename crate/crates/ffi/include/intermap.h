#ifndef INTERMAP_H
#define INTERMAP_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum IqmStatus {
  IQM_STATUS_OK = 0,
  IQM_STATUS_NULL_POINTER = 1,
  IQM_STATUS_INVALID_ARGUMENT = 2,
  IQM_STATUS_OUT_OF_RANGE = 3,
  IQM_STATUS_BUFFER_TOO_SMALL = 4,
  IQM_STATUS_NUMERICAL_FAILURE = 5,
  IQM_STATUS_NO_PREDICTION = 6,
  IQM_STATUS_INTERNAL = 7,
} IqmStatus;

typedef enum IqmRepresentation {
  IQM_REPRESENTATION_MOMENTUM = 0,
  IQM_REPRESENTATION_POSITION = 1,
} IqmRepresentation;

typedef enum IqmVariant {
  IQM_VARIANT_DETERMINISTIC = 0,
  IQM_VARIANT_ISRM_NON_SYMMETRIC = 1,
  IQM_VARIANT_ISRM_SYMMETRIC = 2,
} IqmVariant;

typedef enum IqmCounting {
  IQM_COUNTING_PAPER = 0,
  IQM_COUNTING_OPTIMIZED = 1,
} IqmCounting;

/**
 * Eigenphases and eigenvectors of a unitary.
 */
typedef struct IqmEigenSystem IqmEigenSystem;

/**
 * Dense unitary.
 */
typedef struct IqmMatrix IqmMatrix;

/**
 * Kick strength: `num/den` when `is_rational`, otherwise `value`.
 */
typedef struct IqmAlpha {
  bool is_rational;
  uint64_t num;
  uint64_t den;
  double value;
} IqmAlpha;

typedef struct IqmGateCounts {
  size_t one_qubit;
  size_t two_qubit;
  size_t total;
} IqmGateCounts;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, a static NUL-terminated string.
 */
const char *iqm_version(void);

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *iqm_last_error(void);

/**
 * Deterministic map on `n_qubits` qubits, momentum representation.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum IqmStatus iqm_map_new(uint32_t n_qubits, struct IqmAlpha alpha, struct IqmMatrix **out);

/**
 * Realization `realization` of an ISRM ensemble with uniform phases.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum IqmStatus iqm_isrm_new(uint32_t n_qubits,
                            struct IqmAlpha alpha,
                            bool symmetric,
                            uint64_t seed,
                            uint64_t realization,
                            struct IqmMatrix **out);

/**
 * A copy of `m` in the requested representation.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for a pointer write.
 */
enum IqmStatus iqm_matrix_to_representation(const struct IqmMatrix *m,
                                            enum IqmRepresentation repr,
                                            struct IqmMatrix **out);

/**
 * Dimension of `m`, 0 for NULL.
 *
 * # Safety
 * `m` must be NULL or a live handle.
 */
size_t iqm_matrix_dim(const struct IqmMatrix *m);

/**
 * # Safety
 * `m` must be a live handle; `re` and `im` valid for writes.
 */
enum IqmStatus iqm_matrix_get(const struct IqmMatrix *m,
                              size_t row,
                              size_t col,
                              double *re,
                              double *im);

/**
 * Copy all entries row-major into `out`, which holds `len` doubles
 * (at least `2 N²`).
 *
 * # Safety
 * `m` must be a live handle and `out` valid for `len` writes.
 */
enum IqmStatus iqm_matrix_copy(const struct IqmMatrix *m, double *out, size_t len);

/**
 * # Safety
 * `m` must be NULL or a handle not yet freed.
 */
void iqm_matrix_free(struct IqmMatrix *m);

/**
 * Eigen-decomposition of a unitary handle.
 *
 * # Safety
 * `m` must be a live handle and `out` valid for a pointer write.
 */
enum IqmStatus iqm_eigen_new(const struct IqmMatrix *m, struct IqmEigenSystem **out);

/**
 * # Safety
 * `e` must be NULL or a live handle.
 */
size_t iqm_eigen_dim(const struct IqmEigenSystem *e);

/**
 * Eigenphases in `[0, 2π)`, ascending.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for `len` writes.
 */
enum IqmStatus iqm_eigen_phases(const struct IqmEigenSystem *e, double *out, size_t len);

/**
 * Eigenvector `k` as `N` interleaved complex amplitudes.
 *
 * # Safety
 * `e` must be a live handle and `out` valid for `len` writes.
 */
enum IqmStatus iqm_eigen_vector(const struct IqmEigenSystem *e, size_t k, double *out, size_t len);

/**
 * # Safety
 * `e` must be NULL or a handle not yet freed.
 */
void iqm_eigen_free(struct IqmEigenSystem *e);

/**
 * Meyer-Wallach Q of a normalized state of `n` (a power of two) amplitudes.
 *
 * # Safety
 * `amps` must hold `2n` doubles and `out` be valid for a write.
 */
enum IqmStatus iqm_meyer_wallach(const double *amps, size_t n, double *out);

/**
 * Inverse participation ratio `(Σ|ψ|²)² / Σ|ψ|⁴`.
 *
 * # Safety
 * `amps` must hold `2n` doubles and `out` be valid for a write.
 */
enum IqmStatus iqm_ipr(const double *amps, size_t n, double *out);

/**
 * Predicted semi-Poisson exponent; `NO_PREDICTION` when none applies.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IqmStatus iqm_predicted_beta(struct IqmAlpha alpha,
                                  size_t dim,
                                  enum IqmVariant variant,
                                  double *out);

/**
 * Gate counts of the map circuit.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IqmStatus iqm_map_gate_counts(uint32_t n_qubits,
                                   struct IqmAlpha alpha,
                                   enum IqmCounting counting,
                                   struct IqmGateCounts *out);

/**
 * Gate counts of an ISRM circuit with `n_s` random CNOT pairs drawn from `seed`.
 *
 * # Safety
 * `out` must be valid for a write.
 */
enum IqmStatus iqm_isrm_gate_counts(uint32_t n_qubits,
                                    struct IqmAlpha alpha,
                                    size_t n_s,
                                    uint64_t seed,
                                    struct IqmGateCounts *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTERMAP_H */
