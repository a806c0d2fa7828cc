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

#include "rsmfg/risk_dp.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rsmfg/error.h"

namespace rsmfg {
namespace {

// log sum_i exp(v_i), skipping -inf entries.
double LogSumExp(std::span<const double> v) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double x : v) hi = std::max(hi, x);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double x : v) s += std::exp(x - hi);
  return hi + std::log(s);
}

void CheckFlow(const MeasureFlow& flow, int n, const char* who) {
  if (flow.horizon() < n) {
    Fail(ErrorCode::kInvalidArgument,
         std::string(who) + ": flow has " + std::to_string(flow.mus.size()) +
             " entries, need " + std::to_string(n + 1));
  }
}

// Relative excess of q over the row minimum, in the table's scale.
double RelativeExcess(double q, double min, bool log_scale) {
  return log_scale ? std::expm1(q - min) : (q - min) / min;
}

}  // namespace

double TruncationConstant(const MfgModel& model, int k) {
  const double scaled = model.log_value_bound();
  return scaled * std::exp(std::pow(model.beta(), k) * scaled);
}

int TruncationHorizon(const MfgModel& model, double tol, int cap) {
  Require(tol > 0.0, "TruncationHorizon: tolerance must be positive");
  const double scaled = model.log_value_bound();
  if (scaled == 0.0) return 0;
  // log L_0 + (n+1) log beta <= log tol.
  const double log_l0 = std::log(scaled) + scaled;
  const double log_beta = std::log(model.beta());
  const double log_tol = std::log(tol);
  for (int n = 0; n <= cap; ++n) {
    if (log_l0 + (n + 1) * log_beta <= log_tol) return n;
  }
  Fail(ErrorCode::kCapExceeded,
       "truncation horizon for tolerance " + std::to_string(tol) +
           " exceeds the cap of " + std::to_string(cap));
}

ValueTable::ValueTable(int horizon, int num_states, bool log_scale)
    : horizon_(horizon),
      nx_(num_states),
      log_scale_(log_scale),
      data_(static_cast<size_t>(horizon + 2) * num_states,
            log_scale ? 0.0 : 1.0) {}

double ValueTable::Value(int k, int x) const {
  double v = row(k)[x];
  return log_scale_ ? std::exp(v) : v;
}

double ValueTable::LogValue(int k, int x) const {
  double v = row(k)[x];
  return log_scale_ ? v : std::log(v);
}

std::span<const double> ValueTable::row(int k) const {
  Require(k >= 0 && k <= horizon_ + 1, "ValueTable: row out of range");
  return {data_.data() + static_cast<size_t>(k) * nx_,
          static_cast<size_t>(nx_)};
}

std::span<double> ValueTable::mutable_row(int k) {
  Require(k >= 0 && k <= horizon_ + 1, "ValueTable: row out of range");
  return {data_.data() + static_cast<size_t>(k) * nx_,
          static_cast<size_t>(nx_)};
}

std::vector<double> ActionValues(const MfgModel& model, const Stage& stage,
                                 std::span<const double> u, int k,
                                 bool log_scale) {
  const int nx = stage.nx;
  const int na = stage.na;
  Require(static_cast<int>(u.size()) == nx, "ActionValues: row size mismatch");
  const double rate = model.lambda() * std::pow(model.beta(), k);
  std::vector<double> q(static_cast<size_t>(nx) * na);
  std::vector<double> terms(nx);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) {
      auto p = stage.p(x, a);
      double value;
      if (log_scale) {
        for (int y = 0; y < nx; ++y) {
          terms[y] = p[y] > 0.0 ? std::log(p[y]) + u[y]
                                : -std::numeric_limits<double>::infinity();
        }
        value = rate * stage.c(x, a) + LogSumExp(terms);
      } else {
        double expected = 0.0;
        for (int y = 0; y < nx; ++y) expected += p[y] * u[y];
        value = std::exp(rate * stage.c(x, a)) * expected;
      }
      q[static_cast<size_t>(x) * na + a] = value;
    }
  }
  return q;
}

namespace {

BellmanResult MinimizeRows(std::span<const double> q, int nx, int na,
                           bool log_scale) {
  BellmanResult out;
  out.values.resize(nx);
  out.minimizers.resize(nx);
  for (int x = 0; x < nx; ++x) {
    auto row = q.subspan(static_cast<size_t>(x) * na, na);
    double best = *std::min_element(row.begin(), row.end());
    out.values[x] = best;
    for (int a = 0; a < na; ++a) {
      if (RelativeExcess(row[a], best, log_scale) <= kArgminTolerance) {
        out.minimizers[x].push_back(a);
      }
    }
  }
  return out;
}

}  // namespace

BellmanResult BellmanStep(const MfgModel& model, const Dist& mu_k,
                          std::span<const double> u, int k, bool log_scale) {
  Stage stage = MakeStage(model, mu_k);
  auto q = ActionValues(model, stage, u, k, log_scale);
  return MinimizeRows(q, model.num_states(), model.num_actions(), log_scale);
}

ValueTable FiniteHorizonValues(const MfgModel& model, const MeasureFlow& flow,
                               int n) {
  Require(n >= 0, "FiniteHorizonValues: negative horizon");
  CheckFlow(flow, n, "FiniteHorizonValues");
  const bool log_scale = model.needs_log_space();
  ValueTable table(n, model.num_states(), log_scale);
  for (int k = n; k >= 0; --k) {
    BellmanResult step =
        BellmanStep(model, flow.mus[k], table.row(k + 1), k, log_scale);
    std::copy(step.values.begin(), step.values.end(),
              table.mutable_row(k).begin());
  }
  return table;
}

MarkovPolicy GreedyPolicy(const MfgModel& model, const MeasureFlow& flow,
                          const ValueTable& table) {
  const int n = table.horizon();
  CheckFlow(flow, n, "GreedyPolicy");
  const int nx = model.num_states();
  const int na = model.num_actions();
  std::vector<std::vector<int>> actions(n + 1, std::vector<int>(nx));
  for (int k = 0; k <= n; ++k) {
    Stage stage = MakeStage(model, flow.mus[k]);
    auto q = ActionValues(model, stage, table.row(k + 1), k, table.log_scale());
    BellmanResult mins = MinimizeRows(q, nx, na, table.log_scale());
    for (int x = 0; x < nx; ++x) actions[k][x] = mins.minimizers[x].front();
  }
  return MarkovPolicy::Deterministic(nx, na, actions);
}

ValueTable EvaluatePolicy(const MfgModel& model, const MeasureFlow& flow,
                          const MarkovPolicy& policy, int n) {
  Require(n >= 0, "EvaluatePolicy: negative horizon");
  CheckFlow(flow, n, "EvaluatePolicy");
  Require(policy.Covers(n), "EvaluatePolicy: policy shorter than horizon");
  const int nx = model.num_states();
  const int na = model.num_actions();
  const bool log_scale = model.needs_log_space();
  ValueTable table(n, nx, log_scale);
  std::vector<double> terms;
  for (int k = n; k >= 0; --k) {
    Stage stage = MakeStage(model, flow.mus[k]);
    auto q = ActionValues(model, stage, table.row(k + 1), k, log_scale);
    auto out = table.mutable_row(k);
    for (int x = 0; x < nx; ++x) {
      auto pi = policy.row(k, x);
      if (log_scale) {
        terms.clear();
        for (int a = 0; a < na; ++a) {
          if (pi[a] > 0.0) {
            terms.push_back(std::log(pi[a]) +
                            q[static_cast<size_t>(x) * na + a]);
          }
        }
        out[x] = LogSumExp(terms);
      } else {
        double v = 0.0;
        for (int a = 0; a < na; ++a) {
          v += pi[a] * q[static_cast<size_t>(x) * na + a];
        }
        out[x] = v;
      }
    }
  }
  return table;
}

double IntegrateInitial(const MfgModel& model, const ValueTable& table) {
  double v = 0.0;
  for (int x = 0; x < model.num_states(); ++x) {
    if (model.mu0()[x] > 0.0) v += model.mu0()[x] * table.Value(0, x);
  }
  return v;
}

StateActionFlow InducedStateActionFlow(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy, int n) {
  CheckFlow(flow, n, "InducedStateActionFlow");
  Require(policy.Covers(n), "InducedStateActionFlow: policy too short");
  const int nx = model.num_states();
  const int na = model.num_actions();
  StateActionFlow out;
  out.nx = nx;
  out.na = na;
  std::vector<double> marginal = model.mu0().vec();
  for (int k = 0; k <= n; ++k) {
    std::vector<double> nu(static_cast<size_t>(nx) * na);
    for (int x = 0; x < nx; ++x) {
      for (int a = 0; a < na; ++a) {
        nu[static_cast<size_t>(x) * na + a] = marginal[x] * policy.prob(k, x, a);
      }
    }
    if (k < n) {
      Stage stage = MakeStage(model, flow.mus[k]);
      std::vector<double> next(nx, 0.0);
      for (int x = 0; x < nx; ++x) {
        for (int a = 0; a < na; ++a) {
          double w = nu[static_cast<size_t>(x) * na + a];
          if (w == 0.0) continue;
          auto p = stage.p(x, a);
          for (int y = 0; y < nx; ++y) next[y] += w * p[y];
        }
      }
      marginal = Dist::Renormalized(std::move(next)).vec();
    }
    out.nus.push_back(std::move(nu));
  }
  return out;
}

OptimalityCertificate VerifyOptimality(const MfgModel& model,
                                       const MeasureFlow& flow,
                                       const MarkovPolicy& policy,
                                       const StateActionFlow& saflow,
                                       double tol) {
  Require(tol >= 0.0, "VerifyOptimality: negative tolerance");
  const int n = saflow.horizon();
  Require(n >= 0, "VerifyOptimality: empty state-action flow");
  const int nx = model.num_states();
  const int na = model.num_actions();
  Require(saflow.nx == nx && saflow.na == na,
          "VerifyOptimality: state-action flow has the wrong shape");
  StateActionFlow induced = InducedStateActionFlow(model, flow, policy, n);
  for (int k = 0; k <= n; ++k) {
    for (size_t i = 0; i < induced.nus[k].size(); ++i) {
      if (std::abs(induced.nus[k][i] - saflow.nus[k][i]) > 1e-9) {
        Fail(ErrorCode::kValidation,
             "state-action flow is not induced by the policy at k = " +
                 std::to_string(k) + ", entry " + std::to_string(i));
      }
    }
  }

  ValueTable table = FiniteHorizonValues(model, flow, n);
  OptimalityCertificate cert;
  cert.tolerance = tol;
  cert.pass = true;
  for (int k = 0; k <= n; ++k) {
    Stage stage = MakeStage(model, flow.mus[k]);
    auto q = ActionValues(model, stage, table.row(k + 1), k, table.log_scale());
    double mass = 0.0;
    for (int x = 0; x < nx; ++x) {
      auto row = std::span<const double>(q).subspan(
          static_cast<size_t>(x) * na, na);
      double best = *std::min_element(row.begin(), row.end());
      for (int a = 0; a < na; ++a) {
        if (RelativeExcess(row[a], best, table.log_scale()) <= tol) {
          mass += saflow.at(k, x, a);
        }
      }
    }
    cert.masses.push_back(mass);
    if (mass < 1.0 - tol - kDriftTolerance && cert.pass) {
      cert.pass = false;
      cert.first_failure = k;
    }
  }
  return cert;
}

}  // namespace rsmfg
