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

#ifndef RSMFG_RISK_DP_H_
#define RSMFG_RISK_DP_H_

#include <span>
#include <vector>

#include "rsmfg/flows.h"
#include "rsmfg/model.h"

namespace rsmfg {

// Relative tolerance used when recording the set of minimizing actions.
inline constexpr double kArgminTolerance = 1e-12;
inline constexpr int kDefaultHorizonCap = 100000;

// L_k = (lambda K / (1 - beta)) * exp(lambda beta^k K / (1 - beta)), the
// constant of the uniform truncation bound ||J^n_k - J_k|| <= L_k beta^(n+1).
double TruncationConstant(const MfgModel& model, int k = 0);

// Smallest n >= 0 with L_0 beta^(n+1) <= tol. Throws Error(kCapExceeded) if
// no n <= cap qualifies.
int TruncationHorizon(const MfgModel& model, double tol,
                      int cap = kDefaultHorizonCap);

// Risk-sensitive value table J_k(x, lambda beta^k) for k = 0..n+1. Row n+1
// is the terminal row of ones. When the model needs log space the table
// stores log-values; Value()/LogValue() convert as needed.
class ValueTable {
 public:
  ValueTable() = default;
  ValueTable(int horizon, int num_states, bool log_scale);

  int horizon() const { return horizon_; }
  int num_states() const { return nx_; }
  bool log_scale() const { return log_scale_; }

  double Value(int k, int x) const;
  double LogValue(int k, int x) const;
  // Raw storage for row k in the table's own scale.
  std::span<const double> row(int k) const;
  std::span<double> mutable_row(int k);

 private:
  int horizon_ = -1;
  int nx_ = 0;
  bool log_scale_ = false;
  std::vector<double> data_;
};

struct BellmanResult {
  // [T_k u](x), in the scale of the input row.
  std::vector<double> values;
  // Per state, every action attaining the minimum within kArgminTolerance
  // (relative), in increasing order.
  std::vector<std::vector<int>> minimizers;
};

// Q_k(x, a) = exp(lambda beta^k c_k(x,a)) * sum_y p_k(y|x,a) u(y), returned
// row-major [x][a]. With log_scale the input and output are logarithms.
std::vector<double> ActionValues(const MfgModel& model, const Stage& stage,
                                 std::span<const double> u, int k,
                                 bool log_scale = false);

// The operator T_k against mean-field term mu_k.
BellmanResult BellmanStep(const MfgModel& model, const Dist& mu_k,
                          std::span<const double> u, int k,
                          bool log_scale = false);

// Backward induction from the terminal row over a flow of length >= n+1.
ValueTable FiniteHorizonValues(const MfgModel& model, const MeasureFlow& flow,
                               int n);

// Deterministic policy on the minimizers of the table's action values,
// ties broken toward the smallest action index. Covers t = 0..n.
MarkovPolicy GreedyPolicy(const MfgModel& model, const MeasureFlow& flow,
                          const ValueTable& table);

// J^n_k(pi, x, lambda beta^k) by the multiplicative evaluation recursion.
ValueTable EvaluatePolicy(const MfgModel& model, const MeasureFlow& flow,
                          const MarkovPolicy& policy, int n);

// sum_x mu0(x) * table(0, x).
double IntegrateInitial(const MfgModel& model, const ValueTable& table);

// Law of (x(k), a(k)) for k = 0..n under the policy, with x(0) ~ mu0 and
// transitions driven by the exogenous flow.
StateActionFlow InducedStateActionFlow(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy, int n);

struct OptimalityCertificate {
  // nu_k mass on {(x,a) : Q_k(x,a) - [T_k J_{k+1}](x) <= tol * [T_k J_{k+1}](x)}.
  std::vector<double> masses;
  double tolerance = 0.0;
  bool pass = false;
  // First k with mass < 1 - tol, or -1.
  int first_failure = -1;
};

// Checks the optimality criterion: every nu_k puts (almost) all of its mass
// on minimizers of the action values built from J_{k+1}. `saflow` must be the
// state-action flow induced by `policy` under `flow`; a marginal mismatch
// above 1e-9 throws Error(kValidation).
OptimalityCertificate VerifyOptimality(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy,
                                       const StateActionFlow& saflow,
                                       double tol);

}  // namespace rsmfg

#endif  // RSMFG_RISK_DP_H_
