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

// Acceptance suite: one PASS/FAIL line per criterion, with the measured
// quantities. Exit status is non-zero if any criterion fails.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "oracles.h"
#include "rsmfg/augmented.h"
#include "rsmfg/duality.h"
#include "rsmfg/mfe_solver.h"
#include "rsmfg/risk_dp.h"
#include "rsmfg/serialize.h"
#include "rsmfg/simulator.h"

namespace rsmfg {
namespace {

namespace fs = std::filesystem;
using testing::RandomModelOptions;

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

double RelErr(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Options for the random suites: nx, na in {2, 3}, beta in {0.3, 0.7},
// lambda in {0.5, 1}, cycling through all 16 combinations.
RandomModelOptions SuiteOptions(int i) {
  RandomModelOptions o;
  o.num_states = 2 + i % 2;
  o.num_actions = 2 + (i / 2) % 2;
  o.beta = (i / 4) % 2 ? 0.7 : 0.3;
  o.lambda = (i / 8) % 2 ? 1.0 : 0.5;
  return o;
}

fs::path WorkDir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("rsmfg_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

std::string Slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int RunCli(const std::string& args) {
  const std::string cmd = std::string("'") + RSMFG_CLI_PATH + "' " + args +
                          " >/dev/null 2>>'" + (WorkDir() / "cli.log").string() +
                          "'";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Verdict DpOracleEquivalence() {
  std::mt19937_64 rng(1001);
  const int n = 3;
  double worst = 0.0;
  int failures = 0;
  for (int i = 0; i < 200; ++i) {
    MfgModel m = testing::RandomModel(rng, SuiteOptions(i));
    MeasureFlow flow = testing::RandomFlow(rng, m.num_states(), n);
    ValueTable t = FiniteHorizonValues(m, flow, n);
    for (int x = 0; x < m.num_states(); ++x) {
      const double err =
          RelErr(t.Value(0, x), testing::EnumerateOptimalValue(m, flow, n, x));
      worst = std::max(worst, err);
      if (!(err <= 1e-9)) ++failures;
    }
  }
  return {failures == 0,
          Fmt("200 models, n=3, max relative error %.2e vs exhaustive policy "
              "enumeration (threshold 1e-9)", worst)};
}

// Shared by criteria 2 and 3.
struct HorizonSuite {
  int monotonicity_violations = 0;
  int truncation_violations = 0;
  int bound_violations = 0;
  double worst_truncation_ratio = 0.0;
};

HorizonSuite RunHorizonSuite() {
  static HorizonSuite cached = [] {
    HorizonSuite s;
    std::mt19937_64 rng(2002);
    for (int i = 0; i < 100; ++i) {
      MfgModel m = testing::RandomModel(rng, SuiteOptions(i));
      const int nx = m.num_states();
      MeasureFlow flow = testing::RandomFlow(rng, nx, 31);
      const double lk = m.lambda() * m.cost_bound();
      for (int n = 2; n <= 10; ++n) {
        ValueTable a = FiniteHorizonValues(m, flow, n);
        ValueTable b = FiniteHorizonValues(m, flow, n + 1);
        ValueTable far = FiniteHorizonValues(m, flow, n + 20);
        const double bound = TruncationConstant(m) * std::pow(m.beta(), n + 1);
        for (int x = 0; x < nx; ++x) {
          for (int k = 0; k <= n; ++k) {
            if (a.Value(k, x) > b.Value(k, x) + 1e-12) ++s.monotonicity_violations;
          }
          const double diff = std::abs(a.Value(0, x) - far.Value(0, x));
          s.worst_truncation_ratio = std::max(s.worst_truncation_ratio, diff / bound);
          if (diff > bound) ++s.truncation_violations;
        }
        for (int k = 0; k <= n + 1; ++k) {
          double zeta = 0.0;
          for (int t = k; t <= n; ++t) zeta += std::pow(m.beta(), t);
          // Four ulps of slack for the rounding of exp and the products.
          const double upper = std::exp(lk * zeta) * (1.0 + 4e-16);
          for (int x = 0; x < nx; ++x) {
            const double v = a.Value(k, x);
            if (!(v >= 1.0 && v <= upper)) ++s.bound_violations;
          }
        }
      }
    }
    return s;
  }();
  return cached;
}

Verdict MonotonicityAndTruncation() {
  HorizonSuite s = RunHorizonSuite();
  return {s.monotonicity_violations == 0 && s.truncation_violations == 0,
          Fmt("100 models x n=2..10: %d monotonicity violations, %d truncation "
              "violations, max |J^n_0 - J^(n+20)_0| / (L0 beta^(n+1)) = %.3g",
              s.monotonicity_violations, s.truncation_violations,
              s.worst_truncation_ratio)};
}

Verdict ValueBounds() {
  HorizonSuite s = RunHorizonSuite();
  return {s.bound_violations == 0,
          Fmt("%d violations of 1 <= J_k(x) <= exp(lambda K zeta_k,n) over "
              "the same suite", s.bound_violations)};
}

Verdict AugmentedEquivalence() {
  std::mt19937_64 rng(4004);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    MfgModel m = testing::RandomModel(rng, SuiteOptions(i));
    const int n = i % 6;
    MarkovPolicy pi =
        testing::RandomPolicy(rng, m.num_states(), m.num_actions(), n);
    MeasureFlow flow = testing::RandomFlow(rng, m.num_states(), n);
    const double direct = IntegrateInitial(m, EvaluatePolicy(m, flow, pi, n));
    worst = std::max(worst, RelErr(AugmentedEvaluate(m, flow, pi, n), direct));
  }
  return {worst <= 1e-12,
          Fmt("50 models, n=0..5, random policies: max relative error %.2e "
              "(threshold 1e-12)", worst)};
}

Verdict DualityIdentity() {
  std::mt19937_64 rng(5005);
  double worst = 0.0;
  double min_gap = INFINITY;
  const int n = 4;
  for (int i = 0; i < 100; ++i) {
    MfgModel m = testing::RandomModel(rng, SuiteOptions(i));
    const int nx = m.num_states(), na = m.num_actions();
    MeasureFlow flow = testing::RandomFlow(rng, nx, n);
    ValueTable v = FiniteHorizonValues(m, flow, n);
    IsaacsTable w = IsaacsValues(m, flow, n);
    for (int k = 0; k <= n + 1; ++k) {
      for (int x = 0; x < nx; ++x) {
        worst = std::max(worst, RelErr(std::exp(w.w(k, x)), v.Value(k, x)));
      }
    }
    for (int k = 0; k <= n; ++k) {
      for (int x = 0; x < nx; ++x) {
        for (int a = 0; a < na; ++a) {
          const double sup = w.InnerSup(k, x, a);
          for (int j = 0; j < 1000; ++j) {
            std::vector<double> q = testing::RandomSimplexPoint(rng, nx);
            min_gap = std::min(min_gap, sup - w.StageObjective(k, x, a, q));
          }
        }
      }
    }
  }
  return {worst <= 1e-10 && min_gap >= -1e-12,
          Fmt("100 models: max |exp(W) - J| / J = %.2e (threshold 1e-10); "
              "min Gibbs sup minus objective over 1000 q per (k,x,a) = %.2e",
              worst, min_gap)};
}

Verdict SolverSoundness() {
  std::mt19937_64 rng(6006);
  int converged = 0, verified = 0, lipschitz_ok = 0;
  double worst_consistency = 0.0, worst_gap_ratio = 0.0;
  for (int i = 0; i < 20; ++i) {
    RandomModelOptions o = SuiteOptions(i);
    o.kernel_coupling = 0.2;
    o.cost_coupling = 0.2;
    MfgModel m = testing::RandomModel(rng, o);
    LipschitzConstants lip = ComputeLipschitzConstants(m);
    if (lip.kernel <= 0.2 && lip.cost <= 0.2) ++lipschitz_ok;
    MfeResult r = SolveMfe(m);
    const double gap_bound =
        1e-6 + TruncationConstant(m) * std::pow(m.beta(), r.horizon + 1);
    ResidualPair check = MfeResidual(m, r.policy, r.flow, r.horizon);
    worst_consistency = std::max(worst_consistency, check.consistency);
    worst_gap_ratio = std::max(worst_gap_ratio, check.gap / gap_bound);
    if (r.converged && check.consistency <= 1e-6 && check.gap <= gap_bound) {
      ++converged;
    }
    const fs::path model_file = WorkDir() / Fmt("weak_%d.json", i);
    const fs::path result_file = WorkDir() / Fmt("weak_%d.result.json", i);
    std::ofstream(model_file) << ModelToJson(m);
    std::ofstream(result_file) << ToJson(r).dump();
    if (RunCli("verify '" + model_file.string() + "' '" + result_file.string() +
               "' --out '" + (WorkDir() / Fmt("weak_%d.verify.json", i)).string() +
               "'") == 0) {
      ++verified;
    }
  }
  // Strong coupling: the anti-coordination model cycles.
  const fs::path anti = WorkDir() / "anti.result.json";
  const int anti_code =
      RunCli(std::string("solve-mfe '") + RSMFG_DATA_DIR +
             "/anticoordination.json' --out '" + anti.string() + "'");
  const bool anti_flag = nlohmann::json::parse(Slurp(anti))["converged"] == false;
  // Strongly coupled random models: any converged flag must survive an
  // independent residual check.
  int false_flags = 0, strong_converged = 0;
  for (int i = 0; i < 20; ++i) {
    RandomModelOptions o = SuiteOptions(i);
    o.cost_coupling = 3.0;
    MfgModel m = testing::RandomModel(rng, o);
    SolveOptions opts;
    opts.max_iter = 200;
    MfeResult r = SolveMfe(m, opts);
    if (!r.converged) continue;
    ++strong_converged;
    ResidualPair check = MfeResidual(m, r.policy, r.flow, r.horizon);
    if (check.consistency > 2 * opts.tol_fp ||
        check.gap > 10 * opts.tol_fp + 2 * r.truncation_error) {
      ++false_flags;
    }
  }
  const bool pass = lipschitz_ok == 20 && converged == 20 && verified == 20 &&
                    anti_code == 3 && anti_flag && false_flags == 0;
  return {pass,
          Fmt("weak suite: %d/20 with Lp,Lc <= 0.2, %d/20 converged within "
              "thresholds (max consistency %.1e, max gap / bound %.2g), %d/20 "
              "pass all four verify checks; anti-coordination exit %d; strong "
              "random suite %d/20 converged, %d false flags",
              lipschitz_ok, converged, worst_consistency, worst_gap_ratio,
              verified, anti_code, strong_converged, false_flags)};
}

Verdict NashAtOracleScale() {
  MfgModel m = LoadModel(testing::DataPath("congestion.json"));
  MfeResult eq = SolveMfe(m);
  const int n = 2;
  JointOracleResult exact = JointDpOracle(m, eq.policy, 2, n);
  NashGapEstimate proxy = NashGap(m, eq.policy, eq.flow, 2, n, 100000, 777);
  const double se = proxy.gap_stderr;
  // Some value v >= exact - 3 se lies within 3 se of the proxy.
  const bool within = proxy.gap + 3 * se >= exact.gap() - 3 * se;
  const bool pass = exact.gap() >= -1e-12 && within;
  return {pass,
          Fmt("congestion model, N=2, n=2, M=1e5: exact gap %.6g (Markov "
              "deviations %.6g), proxy %.6g (combined stderr %.2g); "
              "proxy + 3se >= exact - 3se: %s",
              exact.gap(),
              exact.equilibrium_value - exact.markov_best_response_value,
              proxy.gap, se, within ? "yes" : "no")};
}

Verdict ConvergenceTrend() {
  MfgModel m = LoadModel(testing::DataPath("congestion.json"));
  MfeResult eq = SolveMfe(m);
  const std::vector<int> ns = {10, 100, 1000};
  ConvergenceStudy s =
      ConvergenceStudyRun(m, eq.policy, eq.flow, ns, eq.horizon, 10000, 888);
  bool decreasing = true;
  std::string rows;
  std::vector<double> log_n, log_tv;
  for (size_t i = 0; i < s.rows.size(); ++i) {
    const StudyRow& r = s.rows[i];
    rows += Fmt("N=%d err %.4g +- %.2g; ", r.num_agents, r.abs_error,
                3 * r.std_error);
    if (i > 0) {
      const StudyRow& p = s.rows[i - 1];
      // Confidence intervals must separate: upper(i) < lower(i - 1).
      if (!(r.abs_error + 3 * r.std_error < p.abs_error - 3 * p.std_error)) {
        decreasing = false;
      }
    }
    double tv = 0.0;
    for (double v : r.mean_tv_by_t) tv += v / r.mean_tv_by_t.size();
    log_n.push_back(std::log(r.num_agents));
    log_tv.push_back(std::log(tv));
  }
  const double mx = (log_n[0] + log_n[1] + log_n[2]) / 3;
  const double my = (log_tv[0] + log_tv[1] + log_tv[2]) / 3;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < 3; ++i) {
    sxy += (log_n[i] - mx) * (log_tv[i] - my);
    sxx += (log_n[i] - mx) * (log_n[i] - mx);
  }
  const double slope = sxy / sxx;
  return {decreasing && slope <= -0.3,
          Fmt("congestion model, n=%d, M=1e4: %sCI-separated decrease: %s; "
              "log-log TV slope %.3f (threshold -0.3)",
              eq.horizon, rows.c_str(), decreasing ? "yes" : "no", slope)};
}

Verdict SmallLambda() {
  std::mt19937_64 rng(9009);
  double lo = INFINITY, hi = 0.0;
  const double lambda = 1e-3;
  for (int i = 0; i < 5; ++i) {
    RandomModelOptions o;
    o.lambda = lambda;
    o.beta = 0.6;
    MfgModel m = testing::RandomModel(rng, o);
    const int n = 4;
    MarkovPolicy pi = testing::RandomPolicy(rng, 2, 2, n);
    MeasureFlow flow = LambdaMap(m, pi, n);
    ValueTable v = EvaluatePolicy(m, flow, pi, n);
    for (int x = 0; x < 2; ++x) {
      testing::CostMoments mom = testing::EnumerateCostMoments(m, flow, pi, n, x);
      const double diff = std::log(v.Value(0, x)) / lambda - mom.mean;
      const double ratio = diff / (lambda / 2 * mom.variance);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
  }
  return {lo >= 0.3 && hi <= 3.0,
          Fmt("lambda=1e-3, 5 models x 2 states: ((1/lambda) log J - E[C]) / "
              "((lambda/2) Var[C]) in [%.4f, %.4f] (allowed [0.3, 3])",
              lo, hi)};
}

Verdict Determinism() {
  const std::string model = std::string(RSMFG_DATA_DIR) + "/congestion.json";
  const fs::path result = WorkDir() / "congestion.result.json";
  if (RunCli("solve-mfe '" + model + "' --out '" + result.string() + "'") != 0) {
    return {false, "could not solve the reference model"};
  }
  const std::string common = "'" + model + "' '" + result.string() + "' ";
  struct Run {
    std::string name;
    std::string args;
  };
  const std::vector<Run> runs = {
      {"sim.json", "simulate " + common + "--agents 50 --reps 500 --seed 1"},
      {"sim.csv", "simulate " + common + "--agents 20 --reps 300 --seed 2 --format csv"},
      {"conv.csv", "convergence " + common + "--agents 5,50 --reps 200 --seed 3 --format csv"},
      {"conv.json", "convergence " + common + "--agents 8,80 --horizon 6 --reps 200 --seed 4 --threads 2"},
      {"gap.json", "nash-gap " + common + "--agents 2 --horizon 3 --reps 2000 --seed 5"},
  };
  int identical = 0;
  for (const Run& r : runs) {
    const fs::path out = WorkDir() / r.name;
    const fs::path replay = WorkDir() / ("replay_" + r.name);
    if (RunCli(r.args + " --out '" + out.string() + "'") != 0) continue;
    if (RunCli("replay '" + out.string() + ".manifest.json' --out '" +
               replay.string() + "'") != 0) {
      continue;
    }
    const std::string a = Slurp(out);
    if (!a.empty() && a == Slurp(replay)) ++identical;
  }
  return {identical == 5,
          Fmt("%d/5 manifests replayed to byte-identical outputs", identical)};
}

}  // namespace
}  // namespace rsmfg

int main() {
  using rsmfg::Verdict;
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "DP oracle equivalence", rsmfg::DpOracleEquivalence},
      {2, "horizon monotonicity and truncation", rsmfg::MonotonicityAndTruncation},
      {3, "value bounds", rsmfg::ValueBounds},
      {4, "augmented-state equivalence", rsmfg::AugmentedEquivalence},
      {5, "entropy duality identity", rsmfg::DualityIdentity},
      {6, "equilibrium solver soundness", rsmfg::SolverSoundness},
      {7, "epsilon-Nash at oracle scale", rsmfg::NashAtOracleScale},
      {8, "finite-N convergence trend", rsmfg::ConvergenceTrend},
      {9, "small risk factor consistency", rsmfg::SmallLambda},
      {10, "manifest determinism", rsmfg::Determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    std::printf("%s criterion %d (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL",
                c.id, c.name, v.detail.c_str(), secs);
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  std::printf("%d/%zu criteria passed\n",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
