#ifndef CCR_H
#define CCR_H

#include <stddef.h>
#include <stdint.h>

typedef enum CcrStatus {
  CCR_STATUS_OK = 0,
  CCR_STATUS_NULL_POINTER = 1,
  CCR_STATUS_INVALID_STATE = 2,
  CCR_STATUS_DIM_MISMATCH = 3,
  CCR_STATUS_NOT_PURE = 4,
  CCR_STATUS_UNSUPPORTED = 5,
  CCR_STATUS_INVALID_ARGUMENT = 6,
  CCR_STATUS_PARSE = 7,
  CCR_STATUS_PANIC = 8,
} CcrStatus;

/*
 Opaque state handle.
 */
typedef struct CcrState CcrState;

/*
 Optimizer settings for variational quantities.
 */
typedef struct CcrOptimizerConfig {
  size_t restarts;
  size_t max_iterations;
  double tolerance;
  uint64_t seed;
  /*
   Nonzero: optimize classical correlations over rank-1 POVMs.
   */
  int povm;
} CcrOptimizerConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Builds a state from a row-major density matrix of `total × total` complex
 entries (`2 * total * total` doubles), `total` being the product of `dims`.

 # Safety
 `dims` must point to `ndims` values and `re_im` to `len` doubles; `out` must be writable.
 */
enum CcrStatus ccr_state_from_density(const size_t *dims,
                                      size_t ndims,
                                      const double *re_im,
                                      size_t len,
                                      struct CcrState **out);

/*
 Builds a pure state from `total` complex amplitudes (`2 * total` doubles).

 # Safety
 As [`ccr_state_from_density`].
 */
enum CcrStatus ccr_state_from_vector(const size_t *dims,
                                     size_t ndims,
                                     const double *re_im,
                                     size_t len,
                                     struct CcrState **out);

/*
 Parses the JSON state-file format accepted by `ccr quantifiers`.

 # Safety
 `text` must be a NUL-terminated string; `out` must be writable.
 */
enum CcrStatus ccr_state_from_json(const char *text, struct CcrState **out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `state` must come from a `ccr_state_from_*` call and not be used afterwards.
 */
void ccr_state_free(struct CcrState *state);

/*
 Total Hilbert-space dimension.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_state_dim(const struct CcrState *state, size_t *out);

/*
 Number of tensor factors.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_state_subsystems(const struct CcrState *state, size_t *out);

/*
 Von Neumann entropy in bits.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_von_neumann_entropy(const struct CcrState *state, double *out);

/*
 Relative entropy of coherence in the computational basis.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_coherence(const struct CcrState *state, double *out);

/*
 Entropic predictability in the computational basis.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_predictability(const struct CcrState *state, double *out);

/*
 Mutual information between the subsystems listed in `party_a` and the
 rest. An empty list means subsystem 0.

 # Safety
 `party_a` must point to `n` values; `state` live; `out` writable.
 */
enum CcrStatus ccr_mutual_information(const struct CcrState *state,
                                      const size_t *party_a,
                                      size_t n,
                                      double *out);

/*
 Conditional entropy `S(A|B)`.

 # Safety
 As [`ccr_mutual_information`].
 */
enum CcrStatus ccr_conditional_entropy(const struct CcrState *state,
                                       const size_t *party_a,
                                       size_t n,
                                       double *out);

/*
 Wootters concurrence of a two-qubit state.

 # Safety
 `state` must be a live handle and `out` writable.
 */
enum CcrStatus ccr_concurrence(const struct CcrState *state, double *out);

/*
 Default optimizer settings.
 */
struct CcrOptimizerConfig ccr_optimizer_default(void);

/*
 Entanglement of formation across the cut (variational search; the
 two-qubit closed form is available through [`ccr_concurrence`]).
 `cfg` may be null for defaults.

 # Safety
 As [`ccr_mutual_information`]; `cfg` null or valid.
 */
enum CcrStatus ccr_entanglement_of_formation(const struct CcrState *state,
                                             const size_t *party_a,
                                             size_t n,
                                             const struct CcrOptimizerConfig *cfg,
                                             double *out);

/*
 Classical correlation `J` of party A, measuring party B.

 # Safety
 As [`ccr_entanglement_of_formation`].
 */
enum CcrStatus ccr_classical_correlation(const struct CcrState *state,
                                         const size_t *party_a,
                                         size_t n,
                                         const struct CcrOptimizerConfig *cfg,
                                         double *out);

/*
 Residual of a named relation (`"ccr-pure"`, `"ccr-reality"`,
 `"ccr-koashi"`, `"ccr-tessier"`, `"ccr-mutual-info"`,
 `"ccr-conditional"`) evaluated on `state` with subsystem 0 as party A.
 `ccr-quantum-classical` takes an ensemble and is not available here.

 # Safety
 `relation` NUL-terminated; `state` live; `cfg` null or valid; `out` writable.
 */
enum CcrStatus ccr_relation_residual(const char *relation,
                                     const struct CcrState *state,
                                     const struct CcrOptimizerConfig *cfg,
                                     double *out);

/*
 Message of the last failed call on this thread, or null. The pointer is
 valid until the next call into this library on the same thread.
 */
const char *ccr_last_error(void);

/*
 Library version, static storage.
 */
const char *ccr_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CCR_H */
