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

#ifndef RSMFG_MFE_SOLVER_H_
#define RSMFG_MFE_SOLVER_H_

#include <cstdint>
#include <vector>

#include "rsmfg/flows.h"
#include "rsmfg/model.h"

namespace rsmfg {

// The consistency map: mu_0 = mu0 and
// mu_{t+1}(y) = sum_{x,a} mu_t(x) pi_t(a|x) p(y|x,a,mu_t), t < T.
MeasureFlow LambdaMap(const MfgModel& model, const MarkovPolicy& policy,
                      int horizon);

// One application of the equilibrium map to a state-action flow:
//   1. mu_t := marginal of nu_t;
//   2. pi := greedy risk-sensitive policy against (mu_t);
//   3. mu'_0 := mu0, mu'_{t+1} := sum_{x,a} nu_t(x,a) p(.|x,a,mu_t);
//   4. nu'_t := mu'_t (x) pi_t.
// The output satisfies the consistency equations and puts all mass on the
// optimal actions for the input's marginals.
StateActionFlow GammaStep(const MfgModel& model, const StateActionFlow& nu,
                          int n);

// Forward sweep of the same map: step 3 propagates with the new policy and
// the new marginals, i.e. nu'_t = LambdaMap(pi)_t (x) pi_t. Fixed points
// coincide with those of GammaStep; without coupling one sweep suffices.
StateActionFlow GammaSweep(const MfgModel& model, const StateActionFlow& nu,
                           int n);

struct ResidualPair {
  double consistency = 0.0;
  double gap = 0.0;
};

// consistency = max_t TV(flow_t, LambdaMap(policy)_t);
// gap = sum_x mu0(x) (J^n_0(pi, x) - J^n_0(x)) against `flow`.
ResidualPair MfeResidual(const MfgModel& model, const MarkovPolicy& policy,
                         const MeasureFlow& flow, int n);

struct SolveOptions {
  double tol_dp = 1e-6;
  double tol_fp = 1e-8;
  int max_iter = 1000;
  double damping = 1.0;
  // Extra attempts from perturbed initial flows when the first one fails.
  int restarts = 3;
  uint64_t restart_seed = 0x5eed;
  int horizon_cap = 100000;
};

struct AttemptOutcome {
  int iterations = 0;
  double step = 0.0;  // last max_t TV(nu^{j+1}_t, nu^j_t)
  double consistency = 0.0;
  double gap = 0.0;
  bool converged = false;
};

struct MfeResult {
  MarkovPolicy policy;
  MeasureFlow flow;
  int horizon = 0;
  double consistency_residual = 0.0;
  double optimality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  // Thresholds the residuals were held to.
  double consistency_tolerance = 0.0;
  double gap_tolerance = 0.0;
  // Truncation error L_0 beta^(n+1) of the chosen horizon.
  double truncation_error = 0.0;
  // Every attempt in the order it ran; the first starts from the uniform
  // policy.
  std::vector<AttemptOutcome> attempts;
};

// Damped Picard iteration nu <- (1 - d) nu + d GammaSweep(nu) over horizon
// n = TruncationHorizon(tol_dp). Never throws on non-convergence: the best
// attempt is returned with converged = false. Throws Error(kInvalidArgument)
// for damping outside (0, 1] or non-positive tolerances.
MfeResult SolveMfe(const MfgModel& model, const SolveOptions& options = {});

}  // namespace rsmfg

#endif  // RSMFG_MFE_SOLVER_H_
