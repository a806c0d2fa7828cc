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

#include "rsmfg/mfe_solver.h"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <utility>

#include "rsmfg/error.h"
#include "rsmfg/risk_dp.h"

namespace rsmfg {

MeasureFlow LambdaMap(const MfgModel& model, const MarkovPolicy& policy,
                      int horizon) {
  Require(horizon >= 0, "LambdaMap: negative horizon");
  Require(horizon == 0 || policy.Covers(horizon - 1),
          "LambdaMap: policy shorter than horizon");
  const int nx = model.num_states();
  const int na = model.num_actions();
  MeasureFlow flow;
  flow.mus.reserve(horizon + 1);
  flow.mus.push_back(model.mu0());
  for (int t = 0; t < horizon; ++t) {
    const Dist& mu = flow.mus.back();
    Stage stage = MakeStage(model, mu);
    std::vector<double> next(nx, 0.0);
    for (int x = 0; x < nx; ++x) {
      if (mu[x] == 0.0) continue;
      for (int a = 0; a < na; ++a) {
        double w = mu[x] * policy.prob(t, x, a);
        if (w == 0.0) continue;
        auto p = stage.p(x, a);
        for (int y = 0; y < nx; ++y) next[y] += w * p[y];
      }
    }
    flow.mus.push_back(Dist::Renormalized(std::move(next)));
  }
  return flow;
}

namespace {

// Propagation half of the equilibrium map:
// mu'_{t+1} = sum_{x,a} nu_t(x,a) p(.|x,a,marginal_t).
MeasureFlow PropagateConsistent(const MfgModel& model,
                                const StateActionFlow& nu,
                                const MeasureFlow& marginals, int n) {
  const int nx = model.num_states();
  const int na = model.num_actions();
  MeasureFlow out;
  out.mus.push_back(model.mu0());
  for (int t = 0; t < n; ++t) {
    Stage stage = MakeStage(model, marginals.mus[t]);
    std::vector<double> next(nx, 0.0);
    for (int x = 0; x < nx; ++x) {
      for (int a = 0; a < na; ++a) {
        double w = nu.at(t, x, a);
        if (w == 0.0) continue;
        auto p = stage.p(x, a);
        for (int y = 0; y < nx; ++y) next[y] += w * p[y];
      }
    }
    out.mus.push_back(Dist::Renormalized(std::move(next)));
  }
  return out;
}

StateActionFlow Truncate(const StateActionFlow& nu, int n) {
  StateActionFlow out;
  out.nx = nu.nx;
  out.na = nu.na;
  out.nus.assign(nu.nus.begin(), nu.nus.begin() + n + 1);
  return out;
}

}  // namespace

StateActionFlow GammaStep(const MfgModel& model, const StateActionFlow& nu,
                          int n) {
  Require(n >= 0, "GammaStep: negative horizon");
  Require(nu.horizon() >= n, "GammaStep: flow shorter than horizon");
  Require(nu.nx == model.num_states() && nu.na == model.num_actions(),
          "GammaStep: flow has the wrong shape");
  StateActionFlow input = nu.horizon() == n ? nu : Truncate(nu, n);
  MeasureFlow marginals = input.Marginals();
  ValueTable table = FiniteHorizonValues(model, marginals, n);
  MarkovPolicy greedy = GreedyPolicy(model, marginals, table);
  MeasureFlow propagated = PropagateConsistent(model, input, marginals, n);
  return Compose(propagated, greedy, n);
}

StateActionFlow GammaSweep(const MfgModel& model, const StateActionFlow& nu,
                           int n) {
  Require(n >= 0, "GammaSweep: negative horizon");
  Require(nu.horizon() >= n, "GammaSweep: flow shorter than horizon");
  Require(nu.nx == model.num_states() && nu.na == model.num_actions(),
          "GammaSweep: flow has the wrong shape");
  MeasureFlow marginals =
      (nu.horizon() == n ? nu : Truncate(nu, n)).Marginals();
  ValueTable table = FiniteHorizonValues(model, marginals, n);
  MarkovPolicy greedy = GreedyPolicy(model, marginals, table);
  return Compose(LambdaMap(model, greedy, n), greedy, n);
}

ResidualPair MfeResidual(const MfgModel& model, const MarkovPolicy& policy,
                         const MeasureFlow& flow, int n) {
  Require(flow.horizon() >= n, "MfeResidual: flow shorter than horizon");
  Require(policy.Covers(n), "MfeResidual: policy shorter than horizon");
  ResidualPair out;
  MeasureFlow induced = LambdaMap(model, policy, n);
  for (int t = 0; t <= n; ++t) {
    out.consistency =
        std::max(out.consistency, TotalVariation(flow.mus[t], induced.mus[t]));
  }
  ValueTable own = EvaluatePolicy(model, flow, policy, n);
  ValueTable best = FiniteHorizonValues(model, flow, n);
  for (int x = 0; x < model.num_states(); ++x) {
    const double w = model.mu0()[x];
    if (w == 0.0) continue;
    if (own.log_scale()) {
      out.gap += w * best.Value(0, x) *
                 std::expm1(own.LogValue(0, x) - best.LogValue(0, x));
    } else {
      out.gap += w * (own.Value(0, x) - best.Value(0, x));
    }
  }
  return out;
}

namespace {

struct Candidate {
  MarkovPolicy policy;
  MeasureFlow flow;
  AttemptOutcome outcome;
};

// nu_t = nu_{t,1}(dx) pi_t(da|x). Where a marginal vanishes the greedy rule
// against the marginals fills in.
std::pair<MarkovPolicy, MeasureFlow> Disintegrate(const MfgModel& model,
                                                  const StateActionFlow& nu,
                                                  int n) {
  const int nx = model.num_states();
  const int na = model.num_actions();
  MeasureFlow marginals = nu.Marginals();
  MarkovPolicy greedy =
      GreedyPolicy(model, marginals, FiniteHorizonValues(model, marginals, n));
  std::vector<std::vector<double>> rules(n + 1);
  for (int t = 0; t <= n; ++t) {
    auto& rule = rules[t];
    rule.resize(static_cast<size_t>(nx) * na);
    for (int x = 0; x < nx; ++x) {
      double m = 0.0;
      for (int a = 0; a < na; ++a) m += nu.at(t, x, a);
      for (int a = 0; a < na; ++a) {
        rule[static_cast<size_t>(x) * na + a] =
            m > 0.0 ? nu.at(t, x, a) / m : greedy.prob(t, x, a);
      }
      double sum = 0.0;
      for (int a = 0; a < na; ++a) sum += rule[static_cast<size_t>(x) * na + a];
      for (int a = 0; a < na; ++a) rule[static_cast<size_t>(x) * na + a] /= sum;
    }
  }
  return {MarkovPolicy(nx, na, std::move(rules)), std::move(marginals)};
}

Candidate RunAttempt(const MfgModel& model, StateActionFlow nu, int n,
                     const SolveOptions& options, double gap_tolerance) {
  Candidate best;
  bool have_candidate = false;
  AttemptOutcome outcome;
  const double d = options.damping;
  for (int j = 1; j <= options.max_iter; ++j) {
    StateActionFlow image = GammaSweep(model, nu, n);
    StateActionFlow next = image;
    if (d < 1.0) {
      for (size_t t = 0; t < next.nus.size(); ++t) {
        for (size_t i = 0; i < next.nus[t].size(); ++i) {
          next.nus[t][i] = (1.0 - d) * nu.nus[t][i] + d * image.nus[t][i];
        }
      }
    }
    outcome.iterations = j;
    outcome.step = FlowDistance(next, nu);
    nu = std::move(next);
    const bool last = j == options.max_iter;
    if (outcome.step > options.tol_fp && !last) continue;

    auto [policy, flow] = Disintegrate(model, nu, n);
    ResidualPair r = MfeResidual(model, policy, flow, n);
    outcome.consistency = r.consistency;
    outcome.gap = r.gap;
    outcome.converged = outcome.step <= options.tol_fp &&
                        r.consistency <= 2.0 * options.tol_fp &&
                        r.gap <= gap_tolerance;
    best = Candidate{std::move(policy), std::move(flow), outcome};
    have_candidate = true;
    if (outcome.converged) break;
  }
  if (!have_candidate) {
    auto [policy, flow] = Disintegrate(model, nu, n);
    ResidualPair r = MfeResidual(model, policy, flow, n);
    outcome.consistency = r.consistency;
    outcome.gap = r.gap;
    best = Candidate{std::move(policy), std::move(flow), outcome};
  }
  return best;
}

MarkovPolicy RandomPolicy(const MfgModel& model, int n, uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int nx = model.num_states();
  const int na = model.num_actions();
  std::vector<std::vector<double>> rules(n + 1);
  for (auto& rule : rules) {
    rule.resize(static_cast<size_t>(nx) * na);
    for (int x = 0; x < nx; ++x) {
      double sum = 0.0;
      for (int a = 0; a < na; ++a) {
        // Exponential draws normalized to a flat Dirichlet sample.
        double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
        double e = -std::log(u);
        rule[static_cast<size_t>(x) * na + a] = e;
        sum += e;
      }
      for (int a = 0; a < na; ++a) rule[static_cast<size_t>(x) * na + a] /= sum;
    }
  }
  return MarkovPolicy(nx, na, std::move(rules));
}

double Score(const AttemptOutcome& o) { return o.consistency + std::abs(o.gap); }

}  // namespace

MfeResult SolveMfe(const MfgModel& model, const SolveOptions& options) {
  Require(options.damping > 0.0 && options.damping <= 1.0,
          "damping must lie in (0, 1]");
  Require(options.tol_dp > 0.0 && options.tol_fp > 0.0,
          "tolerances must be positive");
  Require(options.max_iter >= 1, "max_iter must be at least 1");
  Require(options.restarts >= 0, "restarts must be non-negative");

  const int n = TruncationHorizon(model, options.tol_dp, options.horizon_cap);
  const double truncation = TruncationConstant(model) * std::pow(model.beta(), n + 1);
  const double gap_tolerance = 10.0 * options.tol_fp + truncation;

  MfeResult result;
  result.horizon = n;
  result.consistency_tolerance = 2.0 * options.tol_fp;
  result.gap_tolerance = gap_tolerance;
  result.truncation_error = truncation;

  std::optional<Candidate> chosen;
  for (int attempt = 0; attempt <= options.restarts; ++attempt) {
    MarkovPolicy start =
        attempt == 0 ? MarkovPolicy::Uniform(model.num_states(),
                                             model.num_actions(), n)
                     : RandomPolicy(model, n, options.restart_seed + attempt);
    StateActionFlow nu0 = Compose(LambdaMap(model, start, n), start, n);
    Candidate c = RunAttempt(model, std::move(nu0), n, options, gap_tolerance);
    result.attempts.push_back(c.outcome);
    const bool better = !chosen || Score(c.outcome) < Score(chosen->outcome);
    if (c.outcome.converged || better) chosen = std::move(c);
    if (chosen->outcome.converged) break;
  }

  result.policy = std::move(chosen->policy);
  result.flow = std::move(chosen->flow);
  result.iterations = chosen->outcome.iterations;
  result.consistency_residual = chosen->outcome.consistency;
  result.optimality_gap = chosen->outcome.gap;
  result.converged = chosen->outcome.converged;
  return result;
}

}  // namespace rsmfg
