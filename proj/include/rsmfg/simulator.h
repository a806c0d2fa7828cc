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

#ifndef RSMFG_SIMULATOR_H_
#define RSMFG_SIMULATOR_H_

#include <cstdint>
#include <optional>
#include <vector>

#include "rsmfg/flows.h"
#include "rsmfg/model.h"

namespace rsmfg {

// Replications are reduced in fixed blocks of this many, in replication
// order, so the output does not depend on the thread count.
inline constexpr int kReplicationBlock = 64;

struct SimConfig {
  int num_agents = 1;
  int horizon = 0;
  int replications = 1;
  uint64_t seed = 0;
  // Policy for agent 1 (index 0); everyone else plays the shared policy.
  std::optional<MarkovPolicy> deviator_policy;
  // When set, TV(e_t^(N), reference_t) is recorded for every replication.
  std::optional<MeasureFlow> reference_flow;
  bool keep_replication_tv = false;
  // Worker threads; <= 0 means one per hardware thread.
  int threads = 1;
};

struct SimReport {
  int num_agents = 0;
  int horizon = 0;
  int replications = 0;
  uint64_t seed = 0;
  // Per agent: sample mean and standard error of exp(lambda sum beta^t c).
  std::vector<double> agent_mean;
  std::vector<double> agent_stderr;
  // Average over the non-deviating agents, taken per replication first.
  // Falls back to agent 1 when every agent deviates (N = 1 with a deviator).
  double pooled_mean = 0.0;
  double pooled_stderr = 0.0;
  // Mean empirical state distribution, [t][x], t = 0..horizon.
  std::vector<std::vector<double>> mean_flow;
  // Only filled with a reference flow.
  std::vector<double> tv_mean_by_t;
  std::vector<double> tv_stderr_by_t;
  std::vector<std::vector<double>> tv_by_replication;  // [rep][t]
};

// Derives the RNG seed of one replication from the master seed:
// splitmix64(master ^ splitmix64(replication + 1)).
uint64_t ReplicationSeed(uint64_t master, uint64_t replication);

// Monte-Carlo simulation of the N-agent game. Within a replication, initial
// states are drawn agent by agent; at each t every agent in index order draws
// its action and then its next state. Deterministic in (model, policy, cfg).
SimReport Simulate(const MfgModel& model, const MarkovPolicy& shared_policy,
                   const SimConfig& cfg);

struct StudyRow {
  int num_agents = 0;
  double estimate = 0.0;
  double std_error = 0.0;
  double abs_error = 0.0;
  std::vector<double> mean_tv_by_t;
  std::vector<double> tv_stderr_by_t;
};

struct ConvergenceStudy {
  // J^n_mu(pi) from the multiplicative recursion, integrated over mu0.
  double reference_value = 0.0;
  // L_0 beta^(n+1): the infinite-horizon error budget of the truncation.
  double truncation_error = 0.0;
  int horizon = 0;
  std::vector<StudyRow> rows;
};

ConvergenceStudy ConvergenceStudyRun(const MfgModel& model,
                                     const MarkovPolicy& policy,
                                     const MeasureFlow& flow,
                                     const std::vector<int>& num_agents,
                                     int n, int replications, uint64_t seed,
                                     int threads = 1);

struct NashGapEstimate {
  int num_agents = 0;
  double equilibrium_estimate = 0.0;  // everyone on pi
  double equilibrium_stderr = 0.0;
  double deviation_estimate = 0.0;  // agent 1 on the mean-field best response
  double deviation_stderr = 0.0;
  double gap = 0.0;
  double gap_stderr = 0.0;  // sqrt of the summed variances
  MarkovPolicy best_response;
};

// Both simulations share the seed, so identical policies give gap 0 exactly.
NashGapEstimate NashGap(const MfgModel& model, const MarkovPolicy& policy,
                        const MeasureFlow& flow, int num_agents, int n,
                        int replications, uint64_t seed, int threads = 1);

struct JointOracleResult {
  // Optimal value for agent 1 when it observes the whole joint state.
  double best_response_value = 0.0;
  // Value for agent 1 when it also plays others_policy.
  double equilibrium_value = 0.0;
  // Optimal value over agent 1's local-state Markov policies, by exhaustive
  // search over deterministic ones; NaN when the search exceeds its cap.
  double markov_best_response_value = 0.0;

  double gap() const { return equilibrium_value - best_response_value; }
};

inline constexpr int kJointOracleMaxAgents = 3;
inline constexpr int kJointOracleMaxHorizon = 4;
inline constexpr size_t kJointOracleStateCap = 4096;
inline constexpr size_t kMarkovSearchCap = 1'000'000;

// Exact dynamic program over the joint chain (x_1, ..., x_N). Throws
// Error(kCapExceeded) beyond N = 3, n = 4 or kJointOracleStateCap joint
// states.
JointOracleResult JointDpOracle(const MfgModel& model,
                                const MarkovPolicy& others_policy,
                                int num_agents, int n);

}  // namespace rsmfg

#endif  // RSMFG_SIMULATOR_H_
