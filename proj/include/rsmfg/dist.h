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

#ifndef RSMFG_DIST_H_
#define RSMFG_DIST_H_

#include <span>
#include <string>
#include <vector>

namespace rsmfg {

// Absolute tolerance on the total mass of user-supplied distributions.
inline constexpr double kLoadTolerance = 1e-9;
// Tolerance for accumulated floating-point drift in internal arithmetic.
inline constexpr double kDriftTolerance = 1e-12;

// A probability vector over {0, ..., size()-1}.
//
// Weights are non-negative and sum to one. The validating constructor accepts
// mass errors up to kLoadTolerance and then rescales, so a Dist in hand always
// sums to one up to rounding.
class Dist {
 public:
  Dist() = default;
  // Throws Error(kValidation) on negative weights or |sum - 1| > tolerance.
  explicit Dist(std::vector<double> weights,
                double tolerance = kLoadTolerance);

  static Dist Uniform(int n);
  static Dist Dirac(int n, int index);
  // Clamps tiny negative entries produced by rounding and rescales to unit
  // mass. Use only on vectors that are stochastic up to arithmetic drift.
  static Dist Renormalized(std::vector<double> weights);

  int size() const { return static_cast<int>(weights_.size()); }
  bool empty() const { return weights_.empty(); }
  double operator[](int i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<double>& vec() const { return weights_; }

  friend bool operator==(const Dist&, const Dist&) = default;

 private:
  std::vector<double> weights_;
};

// sup_B |p(B) - q(B)| = (1/2) * sum_i |p_i - q_i|.
double TotalVariation(std::span<const double> p, std::span<const double> q);
inline double TotalVariation(const Dist& p, const Dist& q) {
  return TotalVariation(p.weights(), q.weights());
}

// Returns an empty string when `weights` is a valid distribution within
// `tolerance`, otherwise a description of the first violation.
std::string CheckStochastic(std::span<const double> weights, double tolerance);

}  // namespace rsmfg

#endif  // RSMFG_DIST_H_
