#ifndef CREDAL_LLN_H
#define CREDAL_LLN_H

/* Generated by cbindgen from credal-lln-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>
typedef struct cl_spec cl_spec;

// Status codes returned by every entry point.
typedef enum cl_status {
  // Success; out parameters are valid.
  CL_OK = 0,
  // The computation ran and wrote its result, but the mathematical
  // verdict is negative (verification FAIL, check not passed).
  CL_ERR_CHECK_FAILED = 1,
  // Malformed or out-of-domain input.
  CL_ERR_INVALID_INPUT = 2,
  // An exact enumeration would exceed its configured cap.
  CL_ERR_CAPACITY = 3,
  // Conditioning on an event of upper probability zero.
  CL_ERR_UNDEFINED_CONDITIONING = 4,
  // The strict-positive-lower conditioning policy refused the event.
  CL_ERR_POLICY_VIOLATION = 5,
  // A strategy proposed a distribution outside its step constraint.
  CL_ERR_STRATEGY_VIOLATION = 6,
  // Operating-system level I/O failure.
  CL_ERR_IO = 7,
  // JSON that does not parse or does not match the expected shape.
  CL_ERR_JSON = 8,
  // A `char *` argument was not valid UTF-8.
  CL_ERR_UTF8 = 9,
  // A required pointer argument was NULL.
  CL_ERR_NULL_POINTER = 10,
  // An internal panic was caught at the boundary; state is unchanged.
  CL_ERR_PANIC = 11,
} cl_status;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Version of the library, as a static string; do not free.
const char *cl_version(void);

// Message for the most recent failure on this thread, or NULL if none.
// Valid until the next failing call on the same thread; do not free.
const char *cl_last_error_message(void);

// Release a string returned through a `char **out_json` parameter.
// Passing NULL is a no-op.
//
// # Safety
// `s` must have been returned by this library and not freed before.
void cl_string_free(char *s);

// Parse a process spec from JSON (either the explicit `{"steps": [...]}`
// form or the homogeneous `{"horizon": n, "step": {...}}` form).
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be a valid pointer.
enum cl_status cl_spec_parse_json(const char *json, cl_spec **out);

// Release a spec handle. Passing NULL is a no-op.
//
// # Safety
// `spec` must have come from `cl_spec_parse_json` and not be used after.
void cl_spec_free(cl_spec *spec);

// Number of steps in the spec.
enum cl_status cl_spec_horizon(const cl_spec *spec, uint64_t *out);

// Serialize the spec back to its explicit JSON form.
enum cl_status cl_spec_to_json(const cl_spec *spec, char **out_json);

// Exponential tail bound for sums of `[0, b]`-valued draws, one side.
enum cl_status cl_hoeffding_tail_uniform(double epsilon, double b, uint64_t n, double *out);

// Azuma-style tail bound under per-step range `b`, one side.
enum cl_status cl_azuma_tail_uniform(double epsilon, double b, uint64_t n, double *out);

// Two-sided mean-band coverage lower bound for bounded steps.
enum cl_status cl_wlln_coverage_bounded_uniform(uint64_t n, double epsilon, double b, double *out);

// Dominated-convergence variant of the bounded coverage bound.
enum cl_status cl_dcm_coverage_bounded_uniform(uint64_t n, double epsilon, double b, double *out);

// Two-sided coverage lower bound under moment constraints
// (variance cap `sigma2`, mean half-width `delta`).
enum cl_status cl_wlln_coverage_unbounded(uint64_t n,
                                          double epsilon,
                                          double sigma2,
                                          double delta,
                                          double *out);

// Smallest horizon from which the running-mean band of width `epsilon`
// holds with the strong-law guarantee, bounded case.
enum cl_status cl_slln_threshold_bounded(double epsilon, double b_max, uint64_t *out);

// Strong-law threshold under moment constraints.
enum cl_status cl_slln_threshold_unbounded(double epsilon,
                                           double sigma2,
                                           double delta,
                                           uint64_t *out);

// Markov tail bound `min(expectation_upper / epsilon, 1)` for non-negative
// draws.
enum cl_status cl_markov_tail(double expectation_upper, double epsilon, double *out);

// `exp(s^2 (b - a)^2 / 8)`: dominates `E[exp(s X)]` for any distribution on
// `[a, b]` with mean at most zero.
enum cl_status cl_hoeffding_mgf_bound(double s, double a, double b, double *out);

// Maximal-inequality coverage lower bound from per-step second moments and
// non-decreasing band levels (`len` entries each).
//
// # Safety
// `second_moments` and `epsilons` must point to `len` readable doubles.
enum cl_status cl_khr_bound(const double *second_moments,
                            const double *epsilons,
                            size_t len,
                            double *out);

// Evaluate any formula from a JSON request
// (`{"formula": "thm1", "epsilon": 2.5, "b": [1], "n": 10}`) into a full
// bound-report JSON document.
//
// # Safety
// `request_json` must be a NUL-terminated string; `out_json` valid.
enum cl_status cl_bound_report_json(const char *request_json, char **out_json);

// Exact probability of `event_json` under `strategy` by tree enumeration
// (`leaf_cap` 0 means the library default).
//
// # Safety
// String arguments must be NUL-terminated; `out` valid.
enum cl_status cl_exact_event_probability(const cl_spec *spec,
                                          const char *strategy,
                                          const char *event_json,
                                          uint64_t leaf_cap,
                                          double *out);

// Envelope `[lower, upper]` of the event probability over all adversarial
// strategies, by backward induction (all-credal specs, draw-measurable
// events).
//
// # Safety
// `event_json` must be NUL-terminated; out pointers valid.
enum cl_status cl_dp_event_envelope(const cl_spec *spec,
                                    const char *event_json,
                                    uint64_t leaf_cap,
                                    double *out_lower,
                                    double *out_upper);

// Monte-Carlo count of how many of `trials` trajectories satisfy the event
// (counter-based seeding: equal seeds give equal counts on any machine).
//
// # Safety
// String arguments must be NUL-terminated; `out_count` valid.
enum cl_status cl_count_event(const cl_spec *spec,
                              const char *strategy,
                              const char *event_json,
                              uint64_t trials,
                              uint64_t seed,
                              uint64_t *out_count);

// Verify a bound report (JSON, as produced by `cl_bound_report_json`)
// against the spec: Monte Carlo with exact binomial intervals, plus exact
// enumeration and the adversarial envelope where feasible. Writes the full
// verification record as JSON. `strategies` is a comma-separated name list,
// or NULL for the built-in adversaries. Returns `CL_ERR_CHECK_FAILED` when
// the verdict is FAIL (the record is still written).
//
// # Safety
// String arguments must be NUL-terminated; `out_json` valid.
enum cl_status cl_verify_json(const cl_spec *spec,
                              const char *strategies,
                              const char *event_json,
                              const char *report_json,
                              uint64_t trials,
                              uint64_t seed,
                              double alpha,
                              bool use_exact,
                              bool use_dp,
                              uint64_t leaf_cap,
                              char **out_json);

// Exact martingale-property check by tree enumeration; writes the report
// JSON and returns `CL_ERR_CHECK_FAILED` when the deviation exceeds `tol`.
// `mean_bias` deliberately corrupts the reported means (fault injection).
//
// # Safety
// `strategy` must be NUL-terminated; `out_json` valid.
enum cl_status cl_check_martingale_json(const cl_spec *spec,
                                        const char *strategy,
                                        double tol,
                                        double mean_bias,
                                        uint64_t leaf_cap,
                                        char **out_json);

// Exact second-moment identity check; same conventions as
// `cl_check_martingale_json`.
//
// # Safety
// `strategy` must be NUL-terminated; `out_json` valid.
enum cl_status cl_check_second_moment_json(const cl_spec *spec,
                                           const char *strategy,
                                           double tol,
                                           double mean_bias,
                                           uint64_t leaf_cap,
                                           char **out_json);

// Exact maximal-inequality check: enumerated band probability against the
// closed-form bound on the enumerated step moments (`epsilons`: one
// non-decreasing level per step).
//
// # Safety
// `strategy` must be NUL-terminated, `epsilons` must point to `len`
// readable doubles, `out_json` valid.
enum cl_status cl_check_khr_json(const cl_spec *spec,
                                 const char *strategy,
                                 const double *epsilons,
                                 size_t len,
                                 double tol,
                                 uint64_t leaf_cap,
                                 char **out_json);

// Closed-form per-model coverages and their lower envelope for the
// contamination example at contamination rate `delta` and band `epsilon`.
// Writes `p1`, `p2`, `p3`, `lower` through out pointers (any may be NULL
// to skip).
enum cl_status cl_example1_coverage(double delta,
                                    double epsilon,
                                    uint64_t n,
                                    double *out_p1,
                                    double *out_p2,
                                    double *out_p3,
                                    double *out_lower);

// Conditional-envelope gap of the contamination example's length-`i`
// truncation at coordinate `i`, under both conditioning policies; the
// report is written as JSON. Coordinates above 5 exceed the event-
// enumeration cap and return `CL_ERR_CAPACITY`.
enum cl_status cl_example1_gap_json(double delta, size_t coordinate, char **out_json);

// Names of the built-in strategies, as a JSON array of strings.
enum cl_status cl_strategy_names_json(char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CREDAL_LLN_H */
