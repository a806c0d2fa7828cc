// Copyright 2026 The rsmfg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface to the rsmfg library.
 *
 * Objects are opaque handles owned by the caller and released with the
 * matching *_free function. Every fallible call returns an rsmfg_status;
 * on failure rsmfg_last_error() describes the problem (per thread, valid
 * until the next failing call on that thread). Strings returned through
 * char** out-parameters are heap allocated and released with
 * rsmfg_string_free().
 */

#ifndef RSMFG_RSMFG_H_
#define RSMFG_RSMFG_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RSMFG_API __declspec(dllexport)
#else
#define RSMFG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rsmfg_status {
  RSMFG_OK = 0,
  RSMFG_ERR_PARSE = 1,
  RSMFG_ERR_VALIDATION = 2,
  RSMFG_ERR_NOT_CONVERGED = 3,
  RSMFG_ERR_CAP_EXCEEDED = 4,
  RSMFG_ERR_INVALID_ARGUMENT = 5,
  RSMFG_ERR_IO = 6,
  RSMFG_ERR_INTERNAL = 7
} rsmfg_status;

typedef enum rsmfg_format {
  RSMFG_FORMAT_JSON = 0,
  RSMFG_FORMAT_CSV = 1
} rsmfg_format;

typedef struct rsmfg_model rsmfg_model;
typedef struct rsmfg_result rsmfg_result;

typedef struct rsmfg_solve_options {
  double tol_dp;    /* truncation tolerance for the horizon */
  double tol_fp;    /* fixed-point step tolerance */
  int max_iter;
  double damping;   /* in (0, 1] */
  int restarts;     /* extra attempts from perturbed flows */
} rsmfg_solve_options;

typedef struct rsmfg_verify_options {
  double tol;             /* residual and certificate tolerance */
  int augmented_horizon;  /* horizon of the augmented check, capped at n */
} rsmfg_verify_options;

typedef struct rsmfg_sim_options {
  int num_agents;
  int horizon;       /* < 0: the result's horizon */
  int replications;
  uint64_t seed;
  int threads;       /* <= 0: one per hardware thread */
  rsmfg_format format;
  int keep_replication_tv;
} rsmfg_sim_options;

RSMFG_API const char* rsmfg_version(void);
RSMFG_API const char* rsmfg_last_error(void);
RSMFG_API void rsmfg_string_free(char* s);

/* Models. */
RSMFG_API rsmfg_status rsmfg_model_load(const char* path, rsmfg_model** out);
RSMFG_API rsmfg_status rsmfg_model_parse(const char* json, rsmfg_model** out);
RSMFG_API void rsmfg_model_free(rsmfg_model* model);
RSMFG_API int rsmfg_model_num_states(const rsmfg_model* model);
RSMFG_API int rsmfg_model_num_actions(const rsmfg_model* model);
RSMFG_API size_t rsmfg_model_warning_count(const rsmfg_model* model);
RSMFG_API const char* rsmfg_model_warning(const rsmfg_model* model, size_t i);
/* Lipschitz constants, bounds and warnings as a JSON object. */
RSMFG_API rsmfg_status rsmfg_model_diagnostics(const rsmfg_model* model,
                                               char** json_out);

/* Equilibria. rsmfg_solve returns RSMFG_OK whether or not the iteration
 * converged; query rsmfg_result_converged. */
RSMFG_API void rsmfg_solve_options_init(rsmfg_solve_options* options);
RSMFG_API rsmfg_status rsmfg_solve(const rsmfg_model* model,
                                   const rsmfg_solve_options* options,
                                   rsmfg_result** out);
RSMFG_API int rsmfg_result_converged(const rsmfg_result* result);
RSMFG_API int rsmfg_result_horizon(const rsmfg_result* result);
RSMFG_API int rsmfg_result_iterations(const rsmfg_result* result);
RSMFG_API rsmfg_status rsmfg_result_to_json(const rsmfg_result* result,
                                            char** json_out);
RSMFG_API rsmfg_status rsmfg_result_parse(const char* json,
                                          rsmfg_result** out);
RSMFG_API rsmfg_status rsmfg_result_load(const char* path,
                                         rsmfg_result** out);
RSMFG_API void rsmfg_result_free(rsmfg_result* result);

/* Independent re-verification of a candidate equilibrium: residuals,
 * optimality certificate, entropy-duality identity and augmented-state
 * equivalence. *all_passed is set to 1 only if every check passes. */
RSMFG_API void rsmfg_verify_options_init(rsmfg_verify_options* options);
RSMFG_API rsmfg_status rsmfg_verify(const rsmfg_model* model,
                                    const rsmfg_result* result,
                                    const rsmfg_verify_options* options,
                                    char** report_json, int* all_passed);

/* Monte-Carlo studies of the N-agent game under the result's policy. */
RSMFG_API void rsmfg_sim_options_init(rsmfg_sim_options* options);
RSMFG_API rsmfg_status rsmfg_simulate(const rsmfg_model* model,
                                      const rsmfg_result* result,
                                      const rsmfg_sim_options* options,
                                      char** out);
RSMFG_API rsmfg_status rsmfg_convergence(const rsmfg_model* model,
                                         const rsmfg_result* result,
                                         const int* agent_counts,
                                         size_t num_counts,
                                         const rsmfg_sim_options* options,
                                         char** out);
RSMFG_API rsmfg_status rsmfg_nash_gap(const rsmfg_model* model,
                                      const rsmfg_result* result,
                                      const rsmfg_sim_options* options,
                                      char** out);
/* Exact joint-chain values for N <= 3 agents and horizon <= 4 (JSON). */
RSMFG_API rsmfg_status rsmfg_joint_oracle(const rsmfg_model* model,
                                          const rsmfg_result* result,
                                          int num_agents, int horizon,
                                          char** json_out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* RSMFG_RSMFG_H_ */
