/* C interface for the dsmn library. See dsmn_last_error_message for error details. */

#ifndef DSMN_H
#define DSMN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

#define DSMN_OK 0

#define DSMN_ERR_USAGE 1

#define DSMN_ERR_DOMAIN 2

#define DSMN_ERR_RESOURCE 3

#define DSMN_ERR_NULL 4

/**
 * Opaque multinomial count vector.
 */
typedef struct DsmnCounts DsmnCounts;

/**
 * A (p, q, r) triple: probability for, against, and "don't know".
 */
typedef struct DsmnPqr {
  double p;
  double q;
  double r;
} DsmnPqr;

/**
 * Lower/upper probability bounds.
 */
typedef struct DsmnBounds {
  double lower;
  double upper;
} DsmnBounds;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *dsmn_version(void);

/**
 * Description of the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread. Never NULL.
 */
const char *dsmn_last_error_message(void);

/**
 * Create a count-vector handle from `k` cell counts. On success writes the
 * new handle to `out` and returns 0.
 *
 * # Safety
 * `counts` must point to `k` readable `uint64_t`s and `out` must be a
 * valid, writable pointer.
 */
int32_t dsmn_counts_new(const uint64_t *counts, uintptr_t k, struct DsmnCounts **out);

/**
 * Release a handle created by [`dsmn_counts_new`]. NULL is a no-op.
 *
 * # Safety
 * `handle` must be NULL or a pointer previously returned by
 * [`dsmn_counts_new`] that has not already been freed.
 */
void dsmn_counts_free(struct DsmnCounts *handle);

/**
 * Closed-form (p, q, r) for the assertion {theta_k <= theta0}. `cell` is
 * zero-based.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
int32_t dsmn_pqr_cell_leq(const struct DsmnCounts *handle,
                          uintptr_t cell,
                          double theta0,
                          struct DsmnPqr *out);

/**
 * Monte-Carlo (p, q, r) for {theta_k <= theta0} with `n_draws` posterior
 * draws; deterministic in `seed`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
int32_t dsmn_pqr_cell_leq_mc(const struct DsmnCounts *handle,
                             uintptr_t cell,
                             double theta0,
                             uint64_t n_draws,
                             uint64_t seed,
                             struct DsmnPqr *out);

/**
 * Imprecise-Dirichlet lower/upper probabilities for {theta_k <= theta0}
 * at prior strength `s`.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
int32_t dsmn_idm_cell_leq_bounds(const struct DsmnCounts *handle,
                                 uintptr_t cell,
                                 double theta0,
                                 double s,
                                 struct DsmnBounds *out);

/**
 * Jeffreys-prior posterior probability of {theta_k <= theta0}.
 *
 * # Safety
 * `handle` must be a live handle and `out` writable.
 */
int32_t dsmn_jeffreys_prob(const struct DsmnCounts *handle,
                           uintptr_t cell,
                           double theta0,
                           double *out);

/**
 * Linkage-model acceptance (non-conflict) rate over `proposals` posterior
 * draws; requires a four-category handle. Writes the rate and its binomial
 * standard error.
 *
 * # Safety
 * `handle` must be a live handle; `rate` and `standard_error` writable.
 */
int32_t dsmn_linkage_acceptance_rate(const struct DsmnCounts *handle,
                                     uint64_t proposals,
                                     uint64_t seed,
                                     double *rate,
                                     double *standard_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DSMN_H */
