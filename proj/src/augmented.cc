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

#include "rsmfg/augmented.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "rsmfg/error.h"

namespace rsmfg {
namespace {

// Sorts by (x, c) and merges neighbours whose costs agree within
// kAtomMergeTolerance. The merged atom keeps the first cost of its run so
// that merging never drifts a run's anchor.
void Canonicalize(AtomMeasure& atoms) {
  std::sort(atoms.begin(), atoms.end(),
            [](const AugmentedAtom& l, const AugmentedAtom& r) {
              return l.x != r.x ? l.x < r.x : l.c < r.c;
            });
  size_t out = 0;
  for (size_t i = 0; i < atoms.size();) {
    AugmentedAtom merged = atoms[i];
    size_t j = i + 1;
    while (j < atoms.size() && atoms[j].x == merged.x &&
           atoms[j].c - merged.c <= kAtomMergeTolerance) {
      merged.weight += atoms[j].weight;
      ++j;
    }
    atoms[out++] = merged;
    i = j;
  }
  atoms.resize(out);
}

}  // namespace

AtomMeasure InitialAtoms(const MfgModel& model) {
  AtomMeasure atoms;
  for (int x = 0; x < model.num_states(); ++x) {
    if (model.mu0()[x] > 0.0) atoms.push_back({x, 0.0, model.mu0()[x]});
  }
  return atoms;
}

AtomMeasure AugmentedStep(const MfgModel& model, const MeasureFlow& flow,
                          const MarkovPolicy& policy, int t,
                          const AtomMeasure& atoms, size_t cap) {
  Require(flow.horizon() >= t, "AugmentedStep: flow shorter than horizon");
  Require(policy.Covers(t), "AugmentedStep: policy shorter than horizon");
  const int nx = model.num_states();
  const int na = model.num_actions();
  const double discount = std::pow(model.beta(), t);
  Stage stage = MakeStage(model, flow.mus[t]);
  AtomMeasure next;
  for (const AugmentedAtom& atom : atoms) {
    for (int a = 0; a < na; ++a) {
      const double pa = policy.prob(t, atom.x, a);
      if (pa == 0.0) continue;
      const double c = atom.c + discount * stage.c(atom.x, a);
      auto p = stage.p(atom.x, a);
      for (int y = 0; y < nx; ++y) {
        if (p[y] == 0.0) continue;
        next.push_back({y, c, atom.weight * pa * p[y]});
      }
    }
    if (next.size() > 2 * cap) {
      Canonicalize(next);
      if (next.size() > cap) {
        Fail(ErrorCode::kCapExceeded,
             "augmented atom count exceeded " + std::to_string(cap) +
                 " at step " + std::to_string(t + 1));
      }
    }
  }
  Canonicalize(next);
  if (next.size() > cap) {
    Fail(ErrorCode::kCapExceeded, "augmented atom count exceeded " +
                                      std::to_string(cap) + " at step " +
                                      std::to_string(t + 1));
  }
  return next;
}

std::vector<AtomMeasure> AugmentedFlow(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy, int n,
                                       size_t cap) {
  Require(n >= 0, "AugmentedFlow: negative horizon");
  std::vector<AtomMeasure> out;
  out.reserve(n + 2);
  out.push_back(InitialAtoms(model));
  for (int t = 0; t <= n; ++t) {
    out.push_back(AugmentedStep(model, flow, policy, t, out.back(), cap));
  }
  return out;
}

double AugmentedEvaluate(const MfgModel& model, const MeasureFlow& flow,
                         const MarkovPolicy& policy, int n, size_t cap) {
  Require(n >= 0, "AugmentedEvaluate: negative horizon");
  AtomMeasure atoms = InitialAtoms(model);
  for (int t = 0; t <= n; ++t) {
    atoms = AugmentedStep(model, flow, policy, t, atoms, cap);
  }
  // Terminal cost of the augmented model at stage n+1.
  double value = 0.0;
  for (const AugmentedAtom& atom : atoms) {
    value += atom.weight * std::exp(model.lambda() * atom.c);
  }
  return value;
}

Dist AtomMarginal(const AtomMeasure& atoms, int num_states) {
  std::vector<double> m(num_states, 0.0);
  for (const AugmentedAtom& atom : atoms) m[atom.x] += atom.weight;
  return Dist::Renormalized(std::move(m));
}

}  // namespace rsmfg
