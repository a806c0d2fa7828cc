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

#ifndef RSMFG_AUGMENTED_H_
#define RSMFG_AUGMENTED_H_

#include <cstddef>
#include <vector>

#include "rsmfg/flows.h"
#include "rsmfg/model.h"

namespace rsmfg {

inline constexpr size_t kDefaultAtomCap = 10'000'000;
// Accumulated-cost values closer than this are merged.
inline constexpr double kAtomMergeTolerance = 1e-13;

// One point mass of the law of (x(t), sum_{k<t} beta^k c_k).
struct AugmentedAtom {
  int x = 0;
  double c = 0.0;
  double weight = 0.0;
};

// Atoms sorted by (x, c).
using AtomMeasure = std::vector<AugmentedAtom>;

// mu0 (x) delta_0.
AtomMeasure InitialAtoms(const MfgModel& model);

// Delta_{t+1} from Delta_t: each atom (x, c) moves to
// (y, c + beta^t c(x,a,mu_t)) with probability pi_t(a|x) p(y|x,a,mu_t).
AtomMeasure AugmentedStep(const MfgModel& model, const MeasureFlow& flow,
                          const MarkovPolicy& policy, int t,
                          const AtomMeasure& atoms,
                          size_t cap = kDefaultAtomCap);

// Delta_0, ..., Delta_{n+1}. Throws Error(kCapExceeded) naming the step at
// which the atom count passed `cap`.
std::vector<AtomMeasure> AugmentedFlow(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy, int n,
                                       size_t cap = kDefaultAtomCap);

// E[exp(lambda sum_{t<=n} beta^t c_t)] as the terminal cost of the augmented
// model: sum over atoms of Delta_{n+1} of weight * exp(lambda c).
double AugmentedEvaluate(const MfgModel& model, const MeasureFlow& flow,
                         const MarkovPolicy& policy, int n,
                         size_t cap = kDefaultAtomCap);

// Marginal of an atom measure on X.
Dist AtomMarginal(const AtomMeasure& atoms, int num_states);

}  // namespace rsmfg

#endif  // RSMFG_AUGMENTED_H_
