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

#ifndef RSMFG_FLOWS_H_
#define RSMFG_FLOWS_H_

#include <span>
#include <vector>

#include "rsmfg/dist.h"

namespace rsmfg {

// State-measure flow (mu_0, ..., mu_T).
struct MeasureFlow {
  std::vector<Dist> mus;

  int horizon() const { return static_cast<int>(mus.size()) - 1; }
  const Dist& at(int t) const { return mus.at(t); }
};

// Markov policy: for every t a row-stochastic [x][a] matrix. A stationary
// policy stores a single decision rule that applies at every t.
class MarkovPolicy {
 public:
  MarkovPolicy() = default;
  MarkovPolicy(int num_states, int num_actions,
               std::vector<std::vector<double>> rules, bool stationary = false);

  static MarkovPolicy Uniform(int num_states, int num_actions, int horizon);
  // actions[t][x] -> deterministic rule.
  static MarkovPolicy Deterministic(int num_states, int num_actions,
                                    const std::vector<std::vector<int>>& actions);

  int num_states() const { return nx_; }
  int num_actions() const { return na_; }
  bool stationary() const { return stationary_; }
  // Number of stored decision rules (1 for stationary policies).
  int length() const { return static_cast<int>(rules_.size()); }
  // True when a rule exists for every t in [0, horizon].
  bool Covers(int horizon) const { return stationary_ || length() > horizon; }

  std::span<const double> rule(int t) const;
  std::span<const double> row(int t, int x) const {
    return rule(t).subspan(static_cast<size_t>(x) * na_, na_);
  }
  double prob(int t, int x, int a) const { return row(t, x)[a]; }
  const std::vector<std::vector<double>>& rules() const { return rules_; }

 private:
  int nx_ = 0;
  int na_ = 0;
  bool stationary_ = false;
  std::vector<std::vector<double>> rules_;
};

// Joint state-action flow (nu_0, ..., nu_T), each nu_t stored row-major
// [x][a].
struct StateActionFlow {
  int nx = 0;
  int na = 0;
  std::vector<std::vector<double>> nus;

  int horizon() const { return static_cast<int>(nus.size()) - 1; }
  double at(int t, int x, int a) const {
    return nus[t][static_cast<size_t>(x) * na + a];
  }
  // Marginal on X of nu_t.
  Dist Marginal(int t) const;
  MeasureFlow Marginals() const;
};

// nu_t = mu_t (x) pi_t for t = 0..horizon.
StateActionFlow Compose(const MeasureFlow& flow, const MarkovPolicy& policy,
                        int horizon);

// max over t of the total-variation distance between nu_t and nu'_t.
double FlowDistance(const StateActionFlow& a, const StateActionFlow& b);
double FlowDistance(const MeasureFlow& a, const MeasureFlow& b);

}  // namespace rsmfg

#endif  // RSMFG_FLOWS_H_
