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

#ifndef RSMFG_DUALITY_H_
#define RSMFG_DUALITY_H_

#include <span>
#include <vector>

#include "rsmfg/flows.h"
#include "rsmfg/model.h"

namespace rsmfg {

// Relative entropy h(q || p) with 0 log(0/.) = 0. Returns +infinity when q
// charges a point p does not.
double RelativeEntropy(std::span<const double> q, std::span<const double> p);

// q*(x) proportional to zeta(x) exp(g(x)). Throws Error(kInvalidArgument)
// if zeta has no mass.
std::vector<double> GibbsTilt(std::span<const double> g,
                              std::span<const double> zeta);

struct EntropyDuality {
  double lhs = 0.0;  // log sum_x exp(g(x)) zeta(x)
  double rhs = 0.0;  // sum q* g - h(q* || zeta)
  Dist q_star;
};

EntropyDuality EntropyDualCheck(std::span<const double> g, const Dist& zeta);

// Upper values W_k(x) of the zero-sum reformulation, k = 0..n+1, with
// W_{n+1} = 0 and
//   W_k(x) = min_a sup_q [ sum_y q(y) W_{k+1}(y) + lambda beta^k c_k(x,a)
//                          - h(q || p_k(.|x,a)) ],
// the inner supremum taken at the Gibbs tilt of p_k(.|x,a) by W_{k+1}.
class IsaacsTable {
 public:
  IsaacsTable(const MfgModel& model, const MeasureFlow& flow, int n);

  int horizon() const { return n_; }
  double w(int k, int x) const { return w_[static_cast<size_t>(k) * nx_ + x]; }
  // Maximizing adversary distribution at (k, x, a).
  Dist Maximizer(int k, int x, int a) const;
  // Objective of the inner game at (k, x, a) for an arbitrary q.
  double StageObjective(int k, int x, int a, std::span<const double> q) const;
  // Closed-form inner supremum at (k, x, a).
  double InnerSup(int k, int x, int a) const;

 private:
  double lambda_;
  double beta_;
  std::vector<Stage> stages_;
  int n_;
  int nx_;
  std::vector<double> w_;
};

inline IsaacsTable IsaacsValues(const MfgModel& model, const MeasureFlow& flow,
                                int n) {
  return IsaacsTable(model, flow, n);
}

}  // namespace rsmfg

#endif  // RSMFG_DUALITY_H_
