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

#ifndef RSMFG_MODEL_H_
#define RSMFG_MODEL_H_

#include <span>
#include <string>
#include <vector>

#include "rsmfg/dist.h"

namespace rsmfg {

// Overflow threshold on lambda * K / (1 - beta): above it the value
// recursions run in log space.
inline constexpr double kLogSpaceThreshold = 500.0;

// Finite mean-field game with mixture coupling:
//
//   p(.|x,a,mu) = sum_z mu(z) K_z(.|x,a)
//   c(x,a,mu)   = sum_z mu(z) C(x,a,z)
//
// Immutable once constructed; every accessor is safe to call concurrently.
class MfgModel {
 public:
  struct Spec {
    int num_states = 0;
    int num_actions = 0;
    double beta = 0.0;
    double lambda = 0.0;
    std::vector<double> mu0;
    // Row-major [z][x][a][y].
    std::vector<double> kernel_mix;
    // Row-major [x][a][z].
    std::vector<double> cost_mix;
    // Negative means "use the maximum of cost_mix".
    double cost_bound = -1.0;
  };

  // Validates every invariant and throws Error(kValidation) naming the
  // offending index path on failure.
  explicit MfgModel(Spec spec);

  int num_states() const { return nx_; }
  int num_actions() const { return na_; }
  double beta() const { return beta_; }
  double lambda() const { return lambda_; }
  double cost_bound() const { return cost_bound_; }
  const Dist& mu0() const { return mu0_; }

  // K_z(.|x,a) as a span of length num_states().
  std::span<const double> component_kernel(int z, int x, int a) const;
  double component_cost(int x, int a, int z) const {
    return cost_mix_[(static_cast<size_t>(x) * na_ + a) * nx_ + z];
  }
  const std::vector<double>& kernel_mix() const { return kernel_mix_; }
  const std::vector<double>& cost_mix() const { return cost_mix_; }

  // lambda * K / (1 - beta): the log of the largest attainable value.
  double log_value_bound() const {
    return lambda_ * cost_bound_ / (1.0 - beta_);
  }
  bool needs_log_space() const {
    return log_value_bound() > kLogSpaceThreshold;
  }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  int nx_;
  int na_;
  double beta_;
  double lambda_;
  double cost_bound_;
  Dist mu0_;
  std::vector<double> kernel_mix_;
  std::vector<double> cost_mix_;
  std::vector<std::string> warnings_;
};

// p(.|x,a,mu). Throws Error(kInvalidArgument) on out-of-range indices.
Dist KernelAt(const MfgModel& model, int x, int a, const Dist& mu);
// c(x,a,mu). Throws Error(kInvalidArgument) on out-of-range indices.
double CostAt(const MfgModel& model, int x, int a, const Dist& mu);

// The kernel and cost of every (x, a) under one fixed mean-field term.
// Building one of these per time step is the hot path of every recursion.
struct Stage {
  int nx = 0;
  int na = 0;
  std::vector<double> kernel;  // [x][a][y]
  std::vector<double> cost;    // [x][a]

  std::span<const double> p(int x, int a) const {
    return {kernel.data() + (static_cast<size_t>(x) * na + a) * nx,
            static_cast<size_t>(nx)};
  }
  double c(int x, int a) const { return cost[static_cast<size_t>(x) * na + a]; }
};

Stage MakeStage(const MfgModel& model, std::span<const double> mu);
inline Stage MakeStage(const MfgModel& model, const Dist& mu) {
  return MakeStage(model, mu.weights());
}

struct LipschitzConstants {
  double kernel = 0.0;  // Lp, in total variation
  double cost = 0.0;    // Lc
};

// Exact Lipschitz constants of mu -> p(.|x,a,mu) and mu -> c(x,a,mu) with
// respect to the total-variation distance on the mean-field term.
LipschitzConstants ComputeLipschitzConstants(const MfgModel& model);

// Parsing. Both throw Error(kParse) on malformed input and
// Error(kValidation) on invariant violations.
MfgModel LoadModel(const std::string& path);
MfgModel ParseModel(const std::string& json_text);
std::string ModelToJson(const MfgModel& model);

}  // namespace rsmfg

#endif  // RSMFG_MODEL_H_
