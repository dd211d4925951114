#ifndef SYMRTN_H
#define SYMRTN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Partition function without a boundary field.
#define SYMRTN_Z0 0

// Partition function with the region pinned to the cyclic permutation.
#define SYMRTN_Z1 1

typedef enum SymrtnStatus {
  SYMRTN_STATUS_OK = 0,
  SYMRTN_STATUS_NULL_POINTER = 1,
  SYMRTN_STATUS_INVALID_ARGUMENT = 2,
  SYMRTN_STATUS_MISSING_SYMMETRY = 3,
  SYMRTN_STATUS_BUDGET_EXCEEDED = 4,
  SYMRTN_STATUS_OVERFLOW = 5,
  SYMRTN_STATUS_INTERNAL = 6,
} SymrtnStatus;

// Opaque model handle.
typedef struct SymrtnModel SymrtnModel;

// Entropy estimate; `std_error` is negative when not applicable.
typedef struct SymrtnEntropy {
  double value;
  double std_error;
  // 1 when the value is exact.
  int32_t exact;
} SymrtnEntropy;

// Haar averages of `Tr ρ_A^n` (z1) and `(Tr ρ)^n` (z0).
typedef struct SymrtnHaarAverage {
  double z1_mean;
  double z1_stderr;
  double z0_mean;
  double z0_stderr;
} SymrtnHaarAverage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null. Valid until the next failing call.
const char *symrtn_last_error(void);

// Library version as a static string.
const char *symrtn_version(void);

// Creates a model on a `width x height` lattice with uniform dimensions.
//
// `group` is a name such as `"Z2"` or `"S3"`, or null for no symmetry.
// `region` lists the sites of A. The handle must be released with [`symrtn_model_free`].
//
// # Safety
// Pointers must be valid for the given lengths; `group` must be nul-terminated.
enum SymrtnStatus symrtn_model_new(size_t width,
                                   size_t height,
                                   bool periodic,
                                   size_t d,
                                   size_t bond_dim,
                                   const char *group,
                                   size_t n,
                                   const size_t *region,
                                   size_t region_len,
                                   struct SymrtnModel **out);

// Releases a model. Null is accepted.
//
// # Safety
// `model` must come from [`symrtn_model_new`] and not be used afterwards.
void symrtn_model_free(struct SymrtnModel *model);

// Selects oracle weights (`oracle = true`) or the closed-form wall weights.
//
// # Safety
// `model` must be a live handle.
enum SymrtnStatus symrtn_model_set_oracle_weights(struct SymrtnModel *model, bool oracle);

// Number of lattice sites.
//
// # Safety
// `model` must be a live handle.
enum SymrtnStatus symrtn_model_num_sites(const struct SymrtnModel *model, size_t *out);

// `log Z` by exhaustive enumeration.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SymrtnStatus symrtn_log_partition(const struct SymrtnModel *model,
                                       uint32_t variant,
                                       double *out);

// Action of a configuration given as replica-permutation indices, one per site.
//
// # Safety
// `labels` must hold `len` values and `out` be writable.
enum SymrtnStatus symrtn_action(const struct SymrtnModel *model,
                                const size_t *labels,
                                size_t len,
                                uint32_t variant,
                                double *out);

// Number of group assignments satisfying every edge constraint of a configuration.
//
// # Safety
// `labels` must hold `len` values and `out` be writable.
enum SymrtnStatus symrtn_solution_count(const struct SymrtnModel *model,
                                        const size_t *labels,
                                        size_t len,
                                        uint64_t *out);

// Renyi entropy from exact enumeration of both partition functions.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SymrtnStatus symrtn_entropy_exact(const struct SymrtnModel *model, struct SymrtnEntropy *out);

// Renyi entropy from the ground-state action difference.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SymrtnStatus symrtn_entropy_ground_state(const struct SymrtnModel *model,
                                              struct SymrtnEntropy *out);

// Renyi entropy from a Metropolis estimate of `Z1 / Z0`.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SymrtnStatus symrtn_entropy_monte_carlo(const struct SymrtnModel *model,
                                             uint64_t steps,
                                             uint64_t seed,
                                             struct SymrtnEntropy *out);

// Haar averages over `samples` random PEPS drawn with the model's dimensions and group.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SymrtnStatus symrtn_haar_average(const struct SymrtnModel *model,
                                      uint64_t samples,
                                      uint64_t seed,
                                      struct SymrtnHaarAverage *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMRTN_H */
