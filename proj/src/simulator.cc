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

#include "rsmfg/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <thread>
#include <utility>

#include "rsmfg/error.h"
#include "rsmfg/risk_dp.h"

namespace rsmfg {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// mt19937_64 output is fixed by the standard; the conversions below avoid the
// implementation-defined standard distributions.
class Sampler {
 public:
  explicit Sampler(uint64_t seed) : gen_(seed) {}

  double Uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  int Draw(std::span<const double> p) {
    const double u = Uniform();
    double cumulative = 0.0;
    int last = -1;
    for (size_t i = 0; i < p.size(); ++i) {
      if (p[i] <= 0.0) continue;
      cumulative += p[i];
      last = static_cast<int>(i);
      if (u < cumulative) return last;
    }
    return last;
  }

 private:
  std::mt19937_64 gen_;
};

// Welford accumulator with Chan's pairwise merge.
struct RunningStat {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void Add(double v) {
    count += 1.0;
    const double delta = v - mean;
    mean += delta / count;
    m2 += delta * (v - mean);
  }
  void Merge(const RunningStat& o) {
    if (o.count == 0.0) return;
    if (count == 0.0) {
      *this = o;
      return;
    }
    const double total = count + o.count;
    const double delta = o.mean - mean;
    mean += delta * o.count / total;
    m2 += o.m2 + delta * delta * count * o.count / total;
    count = total;
  }
  double StdError() const {
    if (count < 2.0) return 0.0;
    return std::sqrt(m2 / (count - 1.0) / count);
  }
};

struct BlockResult {
  std::vector<RunningStat> agents;
  RunningStat pooled;
  std::vector<RunningStat> tv;
  std::vector<uint64_t> counts;  // [t][x]
  std::vector<std::vector<double>> tv_by_replication;
};

void ValidateConfig(const MfgModel& model, const MarkovPolicy& policy,
                    const SimConfig& cfg) {
  Require(cfg.num_agents >= 1, "simulation needs at least one agent");
  Require(cfg.replications >= 1, "simulation needs at least one replication");
  Require(cfg.horizon >= 0, "simulation horizon must be non-negative");
  Require(policy.num_states() == model.num_states() &&
              policy.num_actions() == model.num_actions(),
          "policy shape does not match the model");
  Require(policy.Covers(cfg.horizon), "policy shorter than the horizon");
  if (cfg.deviator_policy) {
    Require(cfg.deviator_policy->Covers(cfg.horizon),
            "deviator policy shorter than the horizon");
    Require(cfg.deviator_policy->num_states() == model.num_states() &&
                cfg.deviator_policy->num_actions() == model.num_actions(),
            "deviator policy shape does not match the model");
  }
  if (cfg.reference_flow) {
    Require(cfg.reference_flow->horizon() >= cfg.horizon,
            "reference flow shorter than the horizon");
  }
}

BlockResult RunBlock(const MfgModel& model, const MarkovPolicy& shared,
                     const SimConfig& cfg, int first, int last) {
  const int nx = model.num_states();
  const int n_agents = cfg.num_agents;
  const int horizon = cfg.horizon;
  const bool deviating = cfg.deviator_policy.has_value();
  BlockResult block;
  block.agents.resize(n_agents);
  block.tv.resize(horizon + 1);
  block.counts.assign(static_cast<size_t>(horizon + 1) * nx, 0);

  std::vector<int> states(n_agents);
  std::vector<double> cost(n_agents);
  std::vector<int> counts(nx);
  std::vector<double> empirical(nx);
  std::vector<double> discount(horizon + 1);
  for (int t = 0; t <= horizon; ++t) discount[t] = std::pow(model.beta(), t);

  for (int rep = first; rep < last; ++rep) {
    Sampler rng(ReplicationSeed(cfg.seed, static_cast<uint64_t>(rep)));
    for (int i = 0; i < n_agents; ++i) {
      states[i] = rng.Draw(model.mu0().weights());
    }
    std::fill(cost.begin(), cost.end(), 0.0);
    std::vector<double> tv_row;
    for (int t = 0; t <= horizon; ++t) {
      std::fill(counts.begin(), counts.end(), 0);
      for (int s : states) ++counts[s];
      for (int x = 0; x < nx; ++x) {
        empirical[x] = static_cast<double>(counts[x]) / n_agents;
        block.counts[static_cast<size_t>(t) * nx + x] += counts[x];
      }
      if (cfg.reference_flow) {
        double tv =
            TotalVariation(empirical, cfg.reference_flow->mus[t].weights());
        block.tv[t].Add(tv);
        if (cfg.keep_replication_tv) tv_row.push_back(tv);
      }
      Stage stage = MakeStage(model, empirical);
      for (int i = 0; i < n_agents; ++i) {
        const MarkovPolicy& pi =
            (i == 0 && deviating) ? *cfg.deviator_policy : shared;
        const int x = states[i];
        const int a = rng.Draw(pi.row(t, x));
        cost[i] += discount[t] * stage.c(x, a);
        if (t < horizon) states[i] = rng.Draw(stage.p(x, a));
      }
    }
    double pooled = 0.0;
    int pooled_count = 0;
    for (int i = 0; i < n_agents; ++i) {
      const double v = std::exp(model.lambda() * cost[i]);
      block.agents[i].Add(v);
      if (!(i == 0 && deviating)) {
        pooled += v;
        ++pooled_count;
      }
    }
    block.pooled.Add(pooled_count > 0 ? pooled / pooled_count
                                      : std::exp(model.lambda() * cost[0]));
    if (cfg.keep_replication_tv) {
      block.tv_by_replication.push_back(std::move(tv_row));
    }
  }
  return block;
}

}  // namespace

uint64_t ReplicationSeed(uint64_t master, uint64_t replication) {
  return SplitMix64(master ^ SplitMix64(replication + 1));
}

SimReport Simulate(const MfgModel& model, const MarkovPolicy& shared_policy,
                   const SimConfig& cfg) {
  ValidateConfig(model, shared_policy, cfg);
  const int nx = model.num_states();
  const int horizon = cfg.horizon;
  int threads = cfg.threads > 0
                    ? cfg.threads
                    : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int num_blocks =
      (cfg.replications + kReplicationBlock - 1) / kReplicationBlock;
  threads = std::min(threads, num_blocks);

  BlockResult total;
  total.agents.resize(cfg.num_agents);
  total.tv.resize(horizon + 1);
  total.counts.assign(static_cast<size_t>(horizon + 1) * nx, 0);

  auto merge = [&](BlockResult& block) {
    for (int i = 0; i < cfg.num_agents; ++i) total.agents[i].Merge(block.agents[i]);
    total.pooled.Merge(block.pooled);
    for (int t = 0; t <= horizon; ++t) total.tv[t].Merge(block.tv[t]);
    for (size_t j = 0; j < total.counts.size(); ++j) {
      total.counts[j] += block.counts[j];
    }
    for (auto& row : block.tv_by_replication) {
      total.tv_by_replication.push_back(std::move(row));
    }
  };

  // Blocks run in waves of `threads`; each wave merges in block order.
  for (int wave = 0; wave < num_blocks; wave += threads) {
    const int wave_size = std::min(threads, num_blocks - wave);
    std::vector<BlockResult> results(wave_size);
    auto run = [&](int j) {
      const int b = wave + j;
      const int first = b * kReplicationBlock;
      const int last = std::min(cfg.replications, first + kReplicationBlock);
      results[j] = RunBlock(model, shared_policy, cfg, first, last);
    };
    if (wave_size == 1) {
      run(0);
    } else {
      std::vector<std::thread> workers;
      for (int j = 0; j < wave_size; ++j) workers.emplace_back(run, j);
      for (auto& w : workers) w.join();
    }
    for (auto& r : results) merge(r);
  }

  SimReport report;
  report.num_agents = cfg.num_agents;
  report.horizon = horizon;
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  for (const RunningStat& s : total.agents) {
    report.agent_mean.push_back(s.mean);
    report.agent_stderr.push_back(s.StdError());
  }
  report.pooled_mean = total.pooled.mean;
  report.pooled_stderr = total.pooled.StdError();
  const double denom =
      static_cast<double>(cfg.num_agents) * cfg.replications;
  report.mean_flow.assign(horizon + 1, std::vector<double>(nx));
  for (int t = 0; t <= horizon; ++t) {
    for (int x = 0; x < nx; ++x) {
      report.mean_flow[t][x] =
          static_cast<double>(total.counts[static_cast<size_t>(t) * nx + x]) /
          denom;
    }
  }
  if (cfg.reference_flow) {
    for (int t = 0; t <= horizon; ++t) {
      report.tv_mean_by_t.push_back(total.tv[t].mean);
      report.tv_stderr_by_t.push_back(total.tv[t].StdError());
    }
    report.tv_by_replication = std::move(total.tv_by_replication);
  }
  return report;
}

ConvergenceStudy ConvergenceStudyRun(const MfgModel& model,
                                     const MarkovPolicy& policy,
                                     const MeasureFlow& flow,
                                     const std::vector<int>& num_agents,
                                     int n, int replications, uint64_t seed,
                                     int threads) {
  Require(!num_agents.empty(), "convergence study needs at least one N");
  ConvergenceStudy study;
  study.horizon = n;
  study.reference_value =
      IntegrateInitial(model, EvaluatePolicy(model, flow, policy, n));
  study.truncation_error =
      TruncationConstant(model) * std::pow(model.beta(), n + 1);
  for (int count : num_agents) {
    SimConfig cfg;
    cfg.num_agents = count;
    cfg.horizon = n;
    cfg.replications = replications;
    cfg.seed = seed;
    cfg.reference_flow = flow;
    cfg.threads = threads;
    SimReport report = Simulate(model, policy, cfg);
    StudyRow row;
    row.num_agents = count;
    row.estimate = report.pooled_mean;
    row.std_error = report.pooled_stderr;
    row.abs_error = std::abs(report.pooled_mean - study.reference_value);
    row.mean_tv_by_t = report.tv_mean_by_t;
    row.tv_stderr_by_t = report.tv_stderr_by_t;
    study.rows.push_back(std::move(row));
  }
  return study;
}

NashGapEstimate NashGap(const MfgModel& model, const MarkovPolicy& policy,
                        const MeasureFlow& flow, int num_agents, int n,
                        int replications, uint64_t seed, int threads) {
  NashGapEstimate out;
  out.num_agents = num_agents;
  out.best_response =
      GreedyPolicy(model, flow, FiniteHorizonValues(model, flow, n));
  SimConfig cfg;
  cfg.num_agents = num_agents;
  cfg.horizon = n;
  cfg.replications = replications;
  cfg.seed = seed;
  cfg.threads = threads;
  SimReport equilibrium = Simulate(model, policy, cfg);
  cfg.deviator_policy = out.best_response;
  SimReport deviation = Simulate(model, policy, cfg);
  out.equilibrium_estimate = equilibrium.agent_mean[0];
  out.equilibrium_stderr = equilibrium.agent_stderr[0];
  out.deviation_estimate = deviation.agent_mean[0];
  out.deviation_stderr = deviation.agent_stderr[0];
  out.gap = out.equilibrium_estimate - out.deviation_estimate;
  out.gap_stderr = std::hypot(out.equilibrium_stderr, out.deviation_stderr);
  return out;
}

namespace {

// Exact joint chain of N agents: agent 1 is controlled, the rest play a
// fixed Markov policy. Joint state index = sum_i x_i nx^i.
class JointChain {
 public:
  JointChain(const MfgModel& model, const MarkovPolicy& others, int num_agents)
      : model_(model), others_(others), n_agents_(num_agents) {
    nx_ = model.num_states();
    num_joint_ = 1;
    for (int i = 0; i < n_agents_; ++i) num_joint_ *= nx_;
    stages_.reserve(num_joint_);
    std::vector<double> e(nx_);
    for (size_t s = 0; s < num_joint_; ++s) {
      std::fill(e.begin(), e.end(), 0.0);
      for (int i = 0; i < n_agents_; ++i) e[Agent(s, i)] += 1.0 / n_agents_;
      stages_.push_back(MakeStage(model, e));
    }
  }

  size_t num_joint() const { return num_joint_; }

  int Agent(size_t s, int i) const {
    for (int j = 0; j < i; ++j) s /= nx_;
    return static_cast<int>(s % nx_);
  }

  // exp(lambda beta^t c_1) * E[v(next) | s, a1].
  double ActionValue(int t, size_t s, int a1, const std::vector<double>& v) const {
    const Stage& stage = stages_[s];
    // Per-agent next-state marginals; agents move independently given s.
    std::vector<std::vector<double>> next(n_agents_, std::vector<double>(nx_, 0.0));
    const int x1 = Agent(s, 0);
    auto p1 = stage.p(x1, a1);
    std::copy(p1.begin(), p1.end(), next[0].begin());
    for (int i = 1; i < n_agents_; ++i) {
      const int xi = Agent(s, i);
      for (int a = 0; a < model_.num_actions(); ++a) {
        const double pa = others_.prob(t, xi, a);
        if (pa == 0.0) continue;
        auto p = stage.p(xi, a);
        for (int y = 0; y < nx_; ++y) next[i][y] += pa * p[y];
      }
    }
    double expected = 0.0;
    for (size_t s2 = 0; s2 < num_joint_; ++s2) {
      double prob = 1.0;
      for (int i = 0; i < n_agents_ && prob > 0.0; ++i) {
        prob *= next[i][Agent(s2, i)];
      }
      if (prob > 0.0) expected += prob * v[s2];
    }
    const double rate = model_.lambda() * std::pow(model_.beta(), t);
    return std::exp(rate * stage.c(x1, a1)) * expected;
  }

  double Initial(const std::vector<double>& v) const {
    double total = 0.0;
    for (size_t s = 0; s < num_joint_; ++s) {
      double prob = 1.0;
      for (int i = 0; i < n_agents_; ++i) prob *= model_.mu0()[Agent(s, i)];
      total += prob * v[s];
    }
    return total;
  }

  // Value of agent 1 following `own` (a local-state Markov policy).
  double Evaluate(const MarkovPolicy& own, int n) const {
    std::vector<double> v(num_joint_, 1.0);
    for (int t = n; t >= 0; --t) {
      std::vector<double> prev(num_joint_);
      for (size_t s = 0; s < num_joint_; ++s) {
        const int x1 = Agent(s, 0);
        double total = 0.0;
        for (int a = 0; a < model_.num_actions(); ++a) {
          const double pa = own.prob(t, x1, a);
          if (pa > 0.0) total += pa * ActionValue(t, s, a, v);
        }
        prev[s] = total;
      }
      v = std::move(prev);
    }
    return Initial(v);
  }

  double Optimize(int n) const {
    std::vector<double> v(num_joint_, 1.0);
    for (int t = n; t >= 0; --t) {
      std::vector<double> prev(num_joint_);
      for (size_t s = 0; s < num_joint_; ++s) {
        double best = std::numeric_limits<double>::infinity();
        for (int a = 0; a < model_.num_actions(); ++a) {
          best = std::min(best, ActionValue(t, s, a, v));
        }
        prev[s] = best;
      }
      v = std::move(prev);
    }
    return Initial(v);
  }

 private:
  const MfgModel& model_;
  const MarkovPolicy& others_;
  int n_agents_;
  int nx_;
  size_t num_joint_;
  std::vector<Stage> stages_;
};

}  // namespace

JointOracleResult JointDpOracle(const MfgModel& model,
                                const MarkovPolicy& others_policy,
                                int num_agents, int n) {
  if (num_agents < 1 || num_agents > kJointOracleMaxAgents) {
    Fail(ErrorCode::kCapExceeded,
         "joint oracle supports 1.." + std::to_string(kJointOracleMaxAgents) +
             " agents, got " + std::to_string(num_agents));
  }
  if (n < 0 || n > kJointOracleMaxHorizon) {
    Fail(ErrorCode::kCapExceeded,
         "joint oracle supports horizons 0.." +
             std::to_string(kJointOracleMaxHorizon) + ", got " +
             std::to_string(n));
  }
  Require(others_policy.Covers(n), "others' policy shorter than the horizon");
  double joint = 1.0;
  for (int i = 0; i < num_agents; ++i) joint *= model.num_states();
  if (joint > static_cast<double>(kJointOracleStateCap)) {
    Fail(ErrorCode::kCapExceeded, "joint state space exceeds the oracle cap");
  }

  JointChain chain(model, others_policy, num_agents);
  JointOracleResult out;
  out.best_response_value = chain.Optimize(n);
  out.equilibrium_value = chain.Evaluate(others_policy, n);

  // Agent 1 restricted to its own state: the objective is affine in each
  // decision rule row, so a deterministic rule attains the infimum.
  const int nx = model.num_states();
  const int na = model.num_actions();
  const double slots = static_cast<double>(nx) * (n + 1);
  if (std::pow(static_cast<double>(na), slots) >
      static_cast<double>(kMarkovSearchCap)) {
    out.markov_best_response_value = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  std::vector<std::vector<int>> actions(n + 1, std::vector<int>(nx, 0));
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    best = std::min(best, chain.Evaluate(
                              MarkovPolicy::Deterministic(nx, na, actions), n));
    // Odometer increment over all (t, x) slots.
    int t = 0, x = 0;
    for (t = 0; t <= n; ++t) {
      for (x = 0; x < nx; ++x) {
        if (++actions[t][x] < na) break;
        actions[t][x] = 0;
      }
      if (x < nx) break;
    }
    if (t > n) break;
  }
  out.markov_best_response_value = best;
  return out;
}

}  // namespace rsmfg
