/* Copyright 2026 The DeFT Scheduler Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DEFT_DEFT_H_
#define DEFT_DEFT_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DEFT_API __declspec(dllexport)
#else
#define DEFT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum deft_status {
  DEFT_OK = 0,
  DEFT_ERR_INTERNAL = 1,
  DEFT_ERR_VALIDATION = 2,
  DEFT_ERR_INFEASIBLE = 3,
  DEFT_ERR_IO = 4,
  DEFT_ERR_RECONSTRUCTION = 5,
  DEFT_ERR_MALFORMED_TRACE = 6,
  DEFT_ERR_NON_STEADY_STATE = 7,
  DEFT_ERR_MISMATCH = 8,
  DEFT_ERR_INVARIANT = 9,
  DEFT_ERR_ARGUMENT = 10
} deft_status;

typedef struct deft_profile deft_profile;
typedef struct deft_bundle deft_bundle;

DEFT_API const char* deft_version(void);

/* Message of the last failed call on this thread; "" when none. */
DEFT_API const char* deft_last_error(void);

/* Releases strings returned through char** out-parameters. */
DEFT_API void deft_string_free(char* s);

DEFT_API deft_status deft_profile_load(const char* path, deft_profile** out);
DEFT_API deft_status deft_profile_from_json(const char* json_text, deft_profile** out);
DEFT_API void deft_profile_free(deft_profile* profile);
DEFT_API deft_status deft_profile_bucket_count(const deft_profile* profile, size_t* out);
DEFT_API deft_status deft_profile_to_json(const deft_profile* profile, char** out);

/* Total communication time at the given speed ratio over total compute. */
DEFT_API deft_status deft_coverage_rate(const deft_profile* profile, double speed_ratio, double* out);

/* Runs an experiment config. seed_override may be NULL. */
DEFT_API deft_status deft_experiment_run(const char* config_path, const uint64_t* seed_override, deft_bundle** out);
DEFT_API void deft_bundle_free(deft_bundle* bundle);
DEFT_API deft_status deft_bundle_emit(const deft_bundle* bundle, const char* out_dir);
DEFT_API deft_status deft_bundle_summary_json(const deft_bundle* bundle, char** out);
DEFT_API deft_status deft_bundle_comparison_csv(const deft_bundle* bundle, char** out);

/* Bucket-level profile (JSON) rebuilt from an operator trace file. */
DEFT_API deft_status deft_trace_reconstruct_file(const char* trace_path, size_t n_buckets, char** profile_json);

/* Operator trace (JSON) for `iterations` WFBP iterations of a profile. */
DEFT_API deft_status deft_trace_emit(const deft_profile* profile, int iterations, char** trace_json);

/* Items get ids 1..n_items. One capacity runs the exact solver, several
 * run the greedy multi-knapsack. The result is a JSON object with
 * "knapsacks", "total_value" and "leftovers". */
DEFT_API deft_status deft_solve_knapsack(const int64_t* weights, size_t n_items, const int64_t* capacities,
                                         size_t n_capacities, char** result_json);

#ifdef __cplusplus
}
#endif

#endif /* DEFT_DEFT_H_ */
