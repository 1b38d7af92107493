#ifndef FHSHARE_H
#define FHSHARE_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stddef.h>
#include <stdint.h>
#include <stdbool.h>

typedef enum FhStatus {
  FH_STATUS_OK = 0,
  FH_STATUS_NULL_POINTER = 1,
  FH_STATUS_INVALID_ARGUMENT = 2,
  FH_STATUS_PARSE = 3,
  FH_STATUS_TOO_LARGE = 4,
  FH_STATUS_NO_CONVERGENCE = 5,
  FH_STATUS_IO = 6,
  FH_STATUS_BUFFER_TOO_SMALL = 7,
  FH_STATUS_PANIC = 8,
} FhStatus;

/**
 * A network scenario together with every user's hopping profile.
 */
typedef struct FhScenario FhScenario;

/**
 * Distribution of the number of active users.
 */
typedef struct FhUserCountPmf FhUserCountPmf;

typedef struct FhLevel {
  double prob;
  double c;
  double sigma2;
} FhLevel;

typedef struct FhRateBound {
  double value_bits;
  double slope;
  double residual_bits;
} FhRateBound;

typedef struct FhMcEstimate {
  double bits;
  double std_error;
} FhMcEstimate;

typedef struct FhMaximum {
  double value;
  double argmax;
} FhMaximum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message (NUL-terminated, truncated
 * to `cap`) into `buf` and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or valid for `cap` bytes.
 */
size_t fh_last_error(char *buf, size_t cap);

/**
 * Library version as a static NUL-terminated string.
 */
const char *fh_version(void);

/**
 * Parses a scenario JSON document.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be valid for writes.
 */
enum FhStatus fh_scenario_from_json(const char *json, struct FhScenario **out);

/**
 * # Safety
 * `s` must be null or a handle from [`fh_scenario_from_json`] not yet freed.
 */
void fh_scenario_free(struct FhScenario *s);

/**
 * # Safety
 * `s` must be a live scenario handle; `n_users` and `n_subbands` valid for writes.
 */
enum FhStatus fh_scenario_shape(const struct FhScenario *s, size_t *n_users, size_t *n_subbands);

/**
 * Writes up to `cap` interference levels at `receiver` into `levels` and
 * the total level count into `len`. Pass `levels = NULL` to query the count;
 * returns `BUFFER_TOO_SMALL` when `cap` is short.
 *
 * # Safety
 * `s` must be a live handle, `levels` null or valid for `cap` elements, `len` valid for writes.
 */
enum FhStatus fh_spectrum_levels(const struct FhScenario *s,
                                 size_t receiver,
                                 struct FhLevel *levels,
                                 size_t cap,
                                 size_t *len);

/**
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_upper_bound(const struct FhScenario *s, size_t user, struct FhRateBound *out);

/**
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_lower_bound(const struct FhScenario *s, size_t user, struct FhRateBound *out);

/**
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_expected_free_subbands(const struct FhScenario *s, size_t user, double *out);

/**
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_regulated_rate(const struct FhScenario *s,
                                size_t user,
                                size_t n_active,
                                double v,
                                double *out);

/**
 * Monte-Carlo estimate of the user's rate in bits; deterministic in `seed`.
 *
 * # Safety
 * `s` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_mc_mutual_information(const struct FhScenario *s,
                                       size_t user,
                                       size_t n_samples,
                                       uint64_t seed,
                                       struct FhMcEstimate *out);

/**
 * Sum multiplexing gain of `n` users all hopping over `v` of `u` sub-bands.
 */
double fh_smg_fair(double v, size_t n, size_t u);

/**
 * `q[n] = Pr{N = n}` for `n = 0..len`.
 *
 * # Safety
 * `q` must be valid for `len` reads and `out` valid for writes.
 */
enum FhStatus fh_pmf_finite(const double *q, size_t len, struct FhUserCountPmf **out);

/**
 * # Safety
 * `out` must be valid for writes.
 */
enum FhStatus fh_pmf_poisson(double lambda, struct FhUserCountPmf **out);

/**
 * Parses `{"q": [...]}` or `{"poisson": lambda}`.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` valid for writes.
 */
enum FhStatus fh_pmf_from_json(const char *json, struct FhUserCountPmf **out);

/**
 * # Safety
 * `p` must be null or a live user-count handle.
 */
void fh_pmf_free(struct FhUserCountPmf *p);

/**
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_pmf_mean(const struct FhUserCountPmf *p, double *out);

/**
 * Robust FH average sum gain and its hopping parameter.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta1_fh(const struct FhUserCountPmf *p, size_t u, struct FhMaximum *out);

/**
 * Robust FH average minimum gain and its hopping parameter.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta2_fh(const struct FhUserCountPmf *p, size_t u, struct FhMaximum *out);

/**
 * FD average sum gain; `n_des = 0` selects the default design size.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta1_fd(const struct FhUserCountPmf *p, size_t u, size_t n_des, double *out);

/**
 * FD average minimum gain; `n_des = 0` selects the default design size.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta2_fd(const struct FhUserCountPmf *p, size_t u, size_t n_des, double *out);

/**
 * FD expected served fraction; `n_des = 0` selects the default design size.
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta4_fd(const struct FhUserCountPmf *p, size_t u, size_t n_des, double *out);

/**
 * Adaptive FH; `measure` is 1 (average sum gain) or 2 (average per-user gain).
 *
 * # Safety
 * `p` must be a live handle and `out` valid for writes.
 */
enum FhStatus fh_eta_afh(const struct FhUserCountPmf *p, size_t u, uint32_t measure, double *out);

/**
 * Closed-form robust FH average minimum gain for Poisson loads, with
 * `omega = 1 - v/u` at the optimum.
 *
 * # Safety
 * `value` and `omega` must be valid for writes.
 */
enum FhStatus fh_eta2_fh_poisson_closed(double lambda, size_t u, double *value, double *omega);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FHSHARE_H */
