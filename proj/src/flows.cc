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

#include "rsmfg/flows.h"

#include <algorithm>
#include <string>
#include <utility>

#include "rsmfg/error.h"

namespace rsmfg {

MarkovPolicy::MarkovPolicy(int num_states, int num_actions,
                           std::vector<std::vector<double>> rules,
                           bool stationary)
    : nx_(num_states),
      na_(num_actions),
      stationary_(stationary),
      rules_(std::move(rules)) {
  Require(nx_ > 0 && na_ > 0, "MarkovPolicy: empty state or action space");
  Require(!rules_.empty(), "MarkovPolicy: no decision rules");
  Require(!stationary_ || rules_.size() == 1,
          "MarkovPolicy: a stationary policy has exactly one rule");
  for (size_t t = 0; t < rules_.size(); ++t) {
    auto& rule = rules_[t];
    if (rule.size() != static_cast<size_t>(nx_) * na_) {
      Fail(ErrorCode::kValidation,
           "policy rule [" + std::to_string(t) + "] has the wrong size");
    }
    for (int x = 0; x < nx_; ++x) {
      std::span<double> row(rule.data() + static_cast<size_t>(x) * na_, na_);
      std::string problem = CheckStochastic(row, kLoadTolerance);
      if (!problem.empty()) {
        Fail(ErrorCode::kValidation, "policy[" + std::to_string(t) + "][" +
                                         std::to_string(x) + "]: " + problem);
      }
      Dist fixed = Dist::Renormalized({row.begin(), row.end()});
      std::copy(fixed.vec().begin(), fixed.vec().end(), row.begin());
    }
  }
}

MarkovPolicy MarkovPolicy::Uniform(int num_states, int num_actions,
                                   int horizon) {
  std::vector<std::vector<double>> rules(
      horizon + 1, std::vector<double>(static_cast<size_t>(num_states) *
                                           num_actions,
                                       1.0 / num_actions));
  return MarkovPolicy(num_states, num_actions, std::move(rules));
}

MarkovPolicy MarkovPolicy::Deterministic(
    int num_states, int num_actions,
    const std::vector<std::vector<int>>& actions) {
  std::vector<std::vector<double>> rules;
  rules.reserve(actions.size());
  for (const auto& per_state : actions) {
    Require(static_cast<int>(per_state.size()) == num_states,
            "MarkovPolicy::Deterministic: one action per state required");
    std::vector<double> rule(static_cast<size_t>(num_states) * num_actions,
                             0.0);
    for (int x = 0; x < num_states; ++x) {
      Require(per_state[x] >= 0 && per_state[x] < num_actions,
              "MarkovPolicy::Deterministic: action out of range");
      rule[static_cast<size_t>(x) * num_actions + per_state[x]] = 1.0;
    }
    rules.push_back(std::move(rule));
  }
  return MarkovPolicy(num_states, num_actions, std::move(rules));
}

std::span<const double> MarkovPolicy::rule(int t) const {
  if (stationary_) return rules_.front();
  Require(t >= 0 && t < length(), "MarkovPolicy: time index past the policy");
  return rules_[t];
}

Dist StateActionFlow::Marginal(int t) const {
  std::vector<double> m(nx, 0.0);
  const auto& nu = nus.at(t);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) m[x] += nu[static_cast<size_t>(x) * na + a];
  }
  return Dist::Renormalized(std::move(m));
}

MeasureFlow StateActionFlow::Marginals() const {
  MeasureFlow flow;
  for (int t = 0; t <= horizon(); ++t) flow.mus.push_back(Marginal(t));
  return flow;
}

StateActionFlow Compose(const MeasureFlow& flow, const MarkovPolicy& policy,
                        int horizon) {
  Require(flow.horizon() >= horizon, "Compose: flow shorter than horizon");
  Require(policy.Covers(horizon), "Compose: policy shorter than horizon");
  StateActionFlow out;
  out.nx = policy.num_states();
  out.na = policy.num_actions();
  for (int t = 0; t <= horizon; ++t) {
    std::vector<double> nu(static_cast<size_t>(out.nx) * out.na);
    for (int x = 0; x < out.nx; ++x) {
      for (int a = 0; a < out.na; ++a) {
        nu[static_cast<size_t>(x) * out.na + a] =
            flow.mus[t][x] * policy.prob(t, x, a);
      }
    }
    out.nus.push_back(std::move(nu));
  }
  return out;
}

double FlowDistance(const StateActionFlow& a, const StateActionFlow& b) {
  Require(a.nus.size() == b.nus.size(), "FlowDistance: horizon mismatch");
  double d = 0.0;
  for (size_t t = 0; t < a.nus.size(); ++t) {
    d = std::max(d, TotalVariation(a.nus[t], b.nus[t]));
  }
  return d;
}

double FlowDistance(const MeasureFlow& a, const MeasureFlow& b) {
  Require(a.mus.size() == b.mus.size(), "FlowDistance: horizon mismatch");
  double d = 0.0;
  for (size_t t = 0; t < a.mus.size(); ++t) {
    d = std::max(d, TotalVariation(a.mus[t], b.mus[t]));
  }
  return d;
}

}  // namespace rsmfg
