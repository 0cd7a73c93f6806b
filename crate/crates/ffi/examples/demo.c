/* End-to-end demo of the C ABI.
 *
 * Build (from the workspace root, after `cargo build -p credal-lln-ffi`):
 *
 *   cc -std=c99 -Wall -Wextra -I crates/ffi/include \
 *      crates/ffi/examples/demo.c \
 *      target/debug/libcredal_lln_ffi.a -lpthread -ldl -lm -o demo
 */
#include <assert.h>
#include <math.h>
#include <stdio.h>
#include <string.h>

#include "credal_lln.h"

/* Six binary steps; per step the adversary picks any mixture of the two
 * extreme distributions, so the conditional mean floats in [0.5, 0.7]. */
static const char *SPEC =
    "{\"horizon\": 6, \"step\": {\"credal\": {\"values\": [0.0, 1.0],"
    " \"extremes\": [[0.5, 0.5], [0.3, 0.7]]}}}";

int main(void) {
  /* Closed-form bounds. */
  double tail = 0.0;
  assert(cl_hoeffding_tail_uniform(2.5, 1.0, 10, &tail) == CL_OK);
  printf("hoeffding tail (eps=2.5, b=1, n=10): %.12f\n", tail);

  uint64_t threshold = 0;
  assert(cl_slln_threshold_unbounded(0.1, 1.0, 0.5, &threshold) == CL_OK);
  printf("strong-law threshold (eps=0.1, sigma2=1, delta=0.5): %llu\n",
         (unsigned long long)threshold);

  /* Errors carry a status code and a message. */
  double ignored;
  assert(cl_hoeffding_tail_uniform(-1.0, 1.0, 10, &ignored) ==
         CL_ERR_INVALID_INPUT);
  printf("expected failure: %s\n", cl_last_error_message());

  /* Process evaluation through an opaque spec handle. */
  cl_spec *spec = NULL;
  assert(cl_spec_parse_json(SPEC, &spec) == CL_OK);

  const char *event = "{\"SUM_UPPER_DEV\": {\"epsilon\": 1.5}}";
  double p = 0.0, lo = 0.0, hi = 0.0;
  assert(cl_exact_event_probability(spec, "GREEDY_UP", event, 0, &p) == CL_OK);
  assert(cl_dp_event_envelope(spec, event, 0, &lo, &hi) == CL_OK);
  printf("P(deviation) under GREEDY_UP: %.6f; envelope over all "
         "strategies: [%.6f, %.6f]\n",
         p, lo, hi);
  assert(lo <= p + 1e-12 && p <= hi + 1e-12);

  /* Reports travel as JSON; strings come back owned by the caller. */
  char *json = NULL;
  assert(cl_bound_report_json(
             "{\"formula\": \"thm1\", \"epsilon\": 1.5, \"b\": [1.0],"
             " \"n\": 6}",
             &json) == CL_OK);
  printf("bound report:\n%s\n", json);
  cl_string_free(json);

  /* Fault injection: biasing the reported means must fail the exact
   * martingale check, with the report still written. */
  assert(cl_check_martingale_json(spec, "SIGN_SWITCH", 1e-10, 0.05, 0,
                                  &json) == CL_ERR_CHECK_FAILED);
  assert(strstr(json, "\"passed\": false") != NULL);
  cl_string_free(json);

  cl_spec_free(spec);

  /* The contamination family: coverage stuck at 1 - delta for every n. */
  double p2 = 0.0, lower = 0.0;
  assert(cl_example1_coverage(0.3, 0.1, 10000, NULL, &p2, NULL, &lower) ==
         CL_OK);
  printf("contamination coverage at n=10000: p2=%.6f, lower envelope=%.6f\n",
         p2, lower);
  assert(fabs(lower - 0.7) < 1e-12);

  printf("demo: ok\n");
  return 0;
}
