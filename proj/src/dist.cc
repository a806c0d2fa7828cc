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

#include "rsmfg/dist.h"

#include <cmath>
#include <sstream>
#include <utility>

#include "rsmfg/error.h"

namespace rsmfg {

std::string CheckStochastic(std::span<const double> weights,
                            double tolerance) {
  if (weights.empty()) return "empty distribution";
  double sum = 0.0;
  for (size_t i = 0; i < weights.size(); ++i) {
    double w = weights[i];
    if (!std::isfinite(w) || w < 0.0) {
      std::ostringstream out;
      out << "entry [" << i << "] = " << w << " is negative or not finite";
      return out.str();
    }
    sum += w;
  }
  if (std::abs(sum - 1.0) > tolerance) {
    std::ostringstream out;
    out.precision(17);
    out << "weights sum to " << sum << ", not 1";
    return out.str();
  }
  return {};
}

Dist::Dist(std::vector<double> weights, double tolerance) {
  std::string problem = CheckStochastic(weights, tolerance);
  if (!problem.empty()) Fail(ErrorCode::kValidation, problem);
  double sum = 0.0;
  for (double w : weights) sum += w;
  // Data that is already normalized up to rounding is kept bit for bit, so
  // serialized flows reload unchanged.
  if (std::abs(sum - 1.0) > kDriftTolerance) {
    *this = Renormalized(std::move(weights));
  } else {
    weights_ = std::move(weights);
  }
}

Dist Dist::Uniform(int n) {
  Require(n > 0, "Dist::Uniform: size must be positive");
  Dist d;
  d.weights_.assign(n, 1.0 / n);
  return d;
}

Dist Dist::Dirac(int n, int index) {
  Require(n > 0 && index >= 0 && index < n, "Dist::Dirac: index out of range");
  Dist d;
  d.weights_.assign(n, 0.0);
  d.weights_[index] = 1.0;
  return d;
}

Dist Dist::Renormalized(std::vector<double> weights) {
  double sum = 0.0;
  for (double& w : weights) {
    if (w < 0.0) w = 0.0;
    sum += w;
  }
  Require(sum > 0.0, "Dist::Renormalized: no mass");
  if (sum != 1.0) {
    for (double& w : weights) w /= sum;
  }
  Dist d;
  d.weights_ = std::move(weights);
  return d;
}

double TotalVariation(std::span<const double> p, std::span<const double> q) {
  Require(p.size() == q.size(), "TotalVariation: size mismatch");
  double l1 = 0.0;
  for (size_t i = 0; i < p.size(); ++i) l1 += std::abs(p[i] - q[i]);
  return 0.5 * l1;
}

}  // namespace rsmfg
