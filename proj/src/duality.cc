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

#include "rsmfg/duality.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rsmfg/error.h"

namespace rsmfg {

double RelativeEntropy(std::span<const double> q, std::span<const double> p) {
  Require(q.size() == p.size(), "RelativeEntropy: size mismatch");
  double h = 0.0;
  for (size_t i = 0; i < q.size(); ++i) {
    if (q[i] == 0.0) continue;
    if (p[i] == 0.0) return std::numeric_limits<double>::infinity();
    h += q[i] * std::log(q[i] / p[i]);
  }
  // Rounding can leave a tiny negative sum when q == p.
  return std::max(h, 0.0);
}

std::vector<double> GibbsTilt(std::span<const double> g,
                              std::span<const double> zeta) {
  Require(g.size() == zeta.size(), "GibbsTilt: size mismatch");
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < g.size(); ++i) {
    if (zeta[i] > 0.0) hi = std::max(hi, g[i]);
  }
  Require(std::isfinite(hi), "GibbsTilt: reference measure has no mass");
  std::vector<double> q(g.size(), 0.0);
  double sum = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    if (zeta[i] > 0.0) {
      q[i] = zeta[i] * std::exp(g[i] - hi);
      sum += q[i];
    }
  }
  for (double& v : q) v /= sum;
  return q;
}

EntropyDuality EntropyDualCheck(std::span<const double> g, const Dist& zeta) {
  Require(static_cast<int>(g.size()) == zeta.size(),
          "EntropyDualCheck: size mismatch");
  EntropyDuality out;
  std::vector<double> q = GibbsTilt(g, zeta.weights());
  double hi = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < g.size(); ++i) {
    if (zeta[i] > 0.0) hi = std::max(hi, g[i]);
  }
  double s = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    if (zeta[i] > 0.0) s += zeta[i] * std::exp(g[i] - hi);
  }
  out.lhs = hi + std::log(s);
  double expected = 0.0;
  for (size_t i = 0; i < g.size(); ++i) {
    if (q[i] > 0.0) expected += q[i] * g[i];
  }
  out.rhs = expected - RelativeEntropy(q, zeta.weights());
  out.q_star = Dist::Renormalized(std::move(q));
  return out;
}

IsaacsTable::IsaacsTable(const MfgModel& model, const MeasureFlow& flow, int n)
    : lambda_(model.lambda()),
      beta_(model.beta()),
      n_(n),
      nx_(model.num_states()) {
  Require(n >= 0, "IsaacsValues: negative horizon");
  Require(flow.horizon() >= n, "IsaacsValues: flow shorter than horizon");
  stages_.reserve(n + 1);
  for (int k = 0; k <= n; ++k) stages_.push_back(MakeStage(model, flow.mus[k]));
  w_.assign(static_cast<size_t>(n + 2) * nx_, 0.0);
  for (int k = n; k >= 0; --k) {
    for (int x = 0; x < nx_; ++x) {
      double best = std::numeric_limits<double>::infinity();
      for (int a = 0; a < model.num_actions(); ++a) {
        best = std::min(best, InnerSup(k, x, a));
      }
      w_[static_cast<size_t>(k) * nx_ + x] = best;
    }
  }
}

double IsaacsTable::StageObjective(int k, int x, int a,
                                   std::span<const double> q) const {
  Require(k >= 0 && k <= n_, "IsaacsTable: stage out of range");
  auto p = stages_[k].p(x, a);
  const double h = RelativeEntropy(q, p);
  if (std::isinf(h)) return -std::numeric_limits<double>::infinity();
  double future = 0.0;
  for (int y = 0; y < nx_; ++y) {
    if (q[y] > 0.0) future += q[y] * w(k + 1, y);
  }
  return future + lambda_ * std::pow(beta_, k) * stages_[k].c(x, a) - h;
}

Dist IsaacsTable::Maximizer(int k, int x, int a) const {
  Require(k >= 0 && k <= n_, "IsaacsTable: stage out of range");
  std::span<const double> next(w_.data() + static_cast<size_t>(k + 1) * nx_,
                               static_cast<size_t>(nx_));
  return Dist::Renormalized(GibbsTilt(next, stages_[k].p(x, a)));
}

double IsaacsTable::InnerSup(int k, int x, int a) const {
  Dist q = Maximizer(k, x, a);
  return StageObjective(k, x, a, q.weights());
}

}  // namespace rsmfg
