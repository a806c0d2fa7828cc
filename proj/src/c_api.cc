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

#include "rsmfg/rsmfg.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>
#include <utility>

#include "rsmfg/augmented.h"
#include "rsmfg/duality.h"
#include "rsmfg/error.h"
#include "rsmfg/mfe_solver.h"
#include "rsmfg/model.h"
#include "rsmfg/risk_dp.h"
#include "rsmfg/serialize.h"
#include "rsmfg/simulator.h"

struct rsmfg_model {
  rsmfg::MfgModel model;
};

struct rsmfg_result {
  rsmfg::MfeResult result;
};

namespace {

using rsmfg::ErrorCode;
using rsmfg::Json;

constexpr const char* kVersion = "0.1.0";
// Threshold of the exp(W) = J identity check.
constexpr double kDualityTolerance = 1e-10;
// Threshold of the augmented-state equivalence check.
constexpr double kAugmentedTolerance = 1e-12;

thread_local std::string last_error;

rsmfg_status ToStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return RSMFG_ERR_PARSE;
    case ErrorCode::kValidation: return RSMFG_ERR_VALIDATION;
    case ErrorCode::kNotConverged: return RSMFG_ERR_NOT_CONVERGED;
    case ErrorCode::kCapExceeded: return RSMFG_ERR_CAP_EXCEEDED;
    case ErrorCode::kInvalidArgument: return RSMFG_ERR_INVALID_ARGUMENT;
    case ErrorCode::kIo: return RSMFG_ERR_IO;
  }
  return RSMFG_ERR_INTERNAL;
}

template <typename F>
rsmfg_status Guard(F&& body) {
  try {
    body();
    return RSMFG_OK;
  } catch (const rsmfg::Error& e) {
    last_error = e.what();
    return ToStatus(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RSMFG_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RSMFG_ERR_INTERNAL;
  }
}

char* CopyString(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void NotNull(const void* p, const char* what) {
  rsmfg::Require(p != nullptr, std::string(what) + " must not be null");
}

std::string ReadFile(const char* path) {
  std::ifstream in(path);
  if (!in) rsmfg::Fail(ErrorCode::kIo, std::string("cannot open ") + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

int ResolveHorizon(const rsmfg_result* result, int requested) {
  const int n = result->result.horizon;
  if (requested < 0) return n;
  rsmfg::Require(requested <= n && result->result.flow.horizon() >= requested,
                 "requested horizon exceeds the result's horizon");
  return requested;
}

void CheckShapes(const rsmfg_model* model, const rsmfg_result* result) {
  const auto& m = model->model;
  const auto& r = result->result;
  if (r.policy.num_states() != m.num_states() ||
      r.policy.num_actions() != m.num_actions()) {
    rsmfg::Fail(ErrorCode::kValidation,
                "result policy does not match the model's dimensions");
  }
  for (const auto& mu : r.flow.mus) {
    if (mu.size() != m.num_states()) {
      rsmfg::Fail(ErrorCode::kValidation,
                  "result flow does not match the model's state count");
    }
  }
  if (!r.policy.Covers(r.horizon) || r.flow.horizon() < r.horizon) {
    rsmfg::Fail(ErrorCode::kValidation,
                "result policy or flow is shorter than its horizon");
  }
}

}  // namespace

extern "C" {

const char* rsmfg_version(void) { return kVersion; }

const char* rsmfg_last_error(void) { return last_error.c_str(); }

void rsmfg_string_free(char* s) { std::free(s); }

rsmfg_status rsmfg_model_load(const char* path, rsmfg_model** out) {
  return Guard([&] {
    NotNull(path, "path");
    NotNull(out, "out");
    *out = new rsmfg_model{rsmfg::LoadModel(path)};
  });
}

rsmfg_status rsmfg_model_parse(const char* json, rsmfg_model** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    *out = new rsmfg_model{rsmfg::ParseModel(json)};
  });
}

void rsmfg_model_free(rsmfg_model* model) { delete model; }

int rsmfg_model_num_states(const rsmfg_model* model) {
  return model ? model->model.num_states() : 0;
}

int rsmfg_model_num_actions(const rsmfg_model* model) {
  return model ? model->model.num_actions() : 0;
}

size_t rsmfg_model_warning_count(const rsmfg_model* model) {
  return model ? model->model.warnings().size() : 0;
}

const char* rsmfg_model_warning(const rsmfg_model* model, size_t i) {
  if (model == nullptr || i >= model->model.warnings().size()) return nullptr;
  return model->model.warnings()[i].c_str();
}

rsmfg_status rsmfg_model_diagnostics(const rsmfg_model* model,
                                     char** json_out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(json_out, "json_out");
    const auto& m = model->model;
    rsmfg::LipschitzConstants lip = rsmfg::ComputeLipschitzConstants(m);
    Json doc = {{"valid", true},
                {"num_states", m.num_states()},
                {"num_actions", m.num_actions()},
                {"beta", m.beta()},
                {"lambda", m.lambda()},
                {"cost_bound", m.cost_bound()},
                {"lipschitz", {{"kernel", lip.kernel}, {"cost", lip.cost}}},
                {"log_value_bound", m.log_value_bound()},
                {"truncation_constant", rsmfg::TruncationConstant(m)},
                {"log_space", m.needs_log_space()},
                {"warnings", m.warnings()}};
    *json_out = CopyString(doc.dump(2));
  });
}

void rsmfg_solve_options_init(rsmfg_solve_options* options) {
  if (options == nullptr) return;
  rsmfg::SolveOptions defaults;
  options->tol_dp = defaults.tol_dp;
  options->tol_fp = defaults.tol_fp;
  options->max_iter = defaults.max_iter;
  options->damping = defaults.damping;
  options->restarts = defaults.restarts;
}

rsmfg_status rsmfg_solve(const rsmfg_model* model,
                         const rsmfg_solve_options* options,
                         rsmfg_result** out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(out, "out");
    rsmfg::SolveOptions opts;
    if (options != nullptr) {
      opts.tol_dp = options->tol_dp;
      opts.tol_fp = options->tol_fp;
      opts.max_iter = options->max_iter;
      opts.damping = options->damping;
      opts.restarts = options->restarts;
    }
    *out = new rsmfg_result{rsmfg::SolveMfe(model->model, opts)};
  });
}

int rsmfg_result_converged(const rsmfg_result* result) {
  return result && result->result.converged ? 1 : 0;
}

int rsmfg_result_horizon(const rsmfg_result* result) {
  return result ? result->result.horizon : -1;
}

int rsmfg_result_iterations(const rsmfg_result* result) {
  return result ? result->result.iterations : 0;
}

rsmfg_status rsmfg_result_to_json(const rsmfg_result* result,
                                  char** json_out) {
  return Guard([&] {
    NotNull(result, "result");
    NotNull(json_out, "json_out");
    *json_out = CopyString(rsmfg::ToJson(result->result).dump(2));
  });
}

rsmfg_status rsmfg_result_parse(const char* json, rsmfg_result** out) {
  return Guard([&] {
    NotNull(json, "json");
    NotNull(out, "out");
    Json doc;
    try {
      doc = Json::parse(json);
    } catch (const Json::exception& e) {
      rsmfg::Fail(ErrorCode::kParse,
                  std::string("malformed result document: ") + e.what());
    }
    *out = new rsmfg_result{rsmfg::MfeResultFromJson(doc)};
  });
}

rsmfg_status rsmfg_result_load(const char* path, rsmfg_result** out) {
  rsmfg_status status = RSMFG_OK;
  std::string text;
  status = Guard([&] {
    NotNull(path, "path");
    text = ReadFile(path);
  });
  if (status != RSMFG_OK) return status;
  return rsmfg_result_parse(text.c_str(), out);
}

void rsmfg_result_free(rsmfg_result* result) { delete result; }

void rsmfg_verify_options_init(rsmfg_verify_options* options) {
  if (options == nullptr) return;
  options->tol = 1e-6;
  options->augmented_horizon = 5;
}

rsmfg_status rsmfg_verify(const rsmfg_model* model, const rsmfg_result* result,
                          const rsmfg_verify_options* options,
                          char** report_json, int* all_passed) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(result, "result");
    NotNull(report_json, "report_json");
    CheckShapes(model, result);
    rsmfg_verify_options opts;
    rsmfg_verify_options_init(&opts);
    if (options != nullptr) opts = *options;
    rsmfg::Require(opts.tol > 0.0, "verification tolerance must be positive");
    const auto& m = model->model;
    const auto& r = result->result;
    const int n = r.horizon;

    // Equilibrium residuals.
    rsmfg::ResidualPair residual = rsmfg::MfeResidual(m, r.policy, r.flow, n);
    const double truncation =
        rsmfg::TruncationConstant(m) * std::pow(m.beta(), n + 1);
    const double gap_threshold = opts.tol + truncation;
    const bool residual_pass = residual.consistency <= opts.tol &&
                               residual.gap <= gap_threshold &&
                               residual.gap >= -1e-12;

    // Optimality certificate on the state-action flow the policy induces.
    rsmfg::StateActionFlow saflow =
        rsmfg::InducedStateActionFlow(m, r.flow, r.policy, n);
    rsmfg::OptimalityCertificate cert =
        rsmfg::VerifyOptimality(m, r.flow, r.policy, saflow, opts.tol);

    // exp(W_k) = J_k along the result's flow.
    rsmfg::ValueTable values = rsmfg::FiniteHorizonValues(m, r.flow, n);
    rsmfg::IsaacsTable isaacs(m, r.flow, n);
    Json duality = rsmfg::ToJson(isaacs, values);
    const double identity = duality["max_identity_residual"].get<double>();
    duality["threshold"] = kDualityTolerance;
    duality["pass"] = identity <= kDualityTolerance;

    // Augmented-state evaluation against the multiplicative recursion.
    const int aug_n = std::max(0, std::min(n, opts.augmented_horizon));
    const double augmented = rsmfg::AugmentedEvaluate(m, r.flow, r.policy, aug_n);
    const double recursion = rsmfg::IntegrateInitial(
        m, rsmfg::EvaluatePolicy(m, r.flow, r.policy, aug_n));
    const double aug_error = std::abs(augmented - recursion) / recursion;
    const bool aug_pass = aug_error <= kAugmentedTolerance;

    const bool pass = residual_pass && cert.pass &&
                      duality["pass"].get<bool>() && aug_pass;
    Json report = {
        {"horizon", n},
        {"tolerance", opts.tol},
        {"mfe_residual",
         {{"consistency", residual.consistency},
          {"gap", residual.gap},
          {"consistency_threshold", opts.tol},
          {"gap_threshold", gap_threshold},
          {"pass", residual_pass}}},
        {"optimality_certificate", rsmfg::ToJson(cert)},
        {"duality", std::move(duality)},
        {"augmented",
         {{"horizon", aug_n},
          {"augmented_value", augmented},
          {"recursion_value", recursion},
          {"relative_error", aug_error},
          {"threshold", kAugmentedTolerance},
          {"pass", aug_pass}}},
        {"value_table", rsmfg::ToJson(values)},
        {"all_passed", pass}};
    *report_json = CopyString(report.dump(2));
    if (all_passed != nullptr) *all_passed = pass ? 1 : 0;
  });
}

void rsmfg_sim_options_init(rsmfg_sim_options* options) {
  if (options == nullptr) return;
  options->num_agents = 100;
  options->horizon = -1;
  options->replications = 1000;
  options->seed = 0;
  options->threads = 1;
  options->format = RSMFG_FORMAT_JSON;
  options->keep_replication_tv = 0;
}

rsmfg_status rsmfg_simulate(const rsmfg_model* model,
                            const rsmfg_result* result,
                            const rsmfg_sim_options* options, char** out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(result, "result");
    NotNull(options, "options");
    NotNull(out, "out");
    CheckShapes(model, result);
    const auto& m = model->model;
    const auto& r = result->result;
    const int n = ResolveHorizon(result, options->horizon);
    rsmfg::SimConfig cfg;
    cfg.num_agents = options->num_agents;
    cfg.horizon = n;
    cfg.replications = options->replications;
    cfg.seed = options->seed;
    cfg.threads = options->threads;
    cfg.reference_flow = r.flow;
    cfg.keep_replication_tv = options->keep_replication_tv != 0;
    rsmfg::SimReport report = rsmfg::Simulate(m, r.policy, cfg);
    const double reference = rsmfg::IntegrateInitial(
        m, rsmfg::EvaluatePolicy(m, r.flow, r.policy, n));
    if (options->format == RSMFG_FORMAT_CSV) {
      *out = CopyString(rsmfg::ToCsv(report, reference));
      return;
    }
    Json doc = rsmfg::ToJson(report);
    doc["reference_value"] = reference;
    doc["abs_error"] = std::abs(report.pooled_mean - reference);
    doc["truncation_error"] =
        rsmfg::TruncationConstant(m) * std::pow(m.beta(), n + 1);
    *out = CopyString(doc.dump(2));
  });
}

rsmfg_status rsmfg_convergence(const rsmfg_model* model,
                               const rsmfg_result* result,
                               const int* agent_counts, size_t num_counts,
                               const rsmfg_sim_options* options, char** out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(result, "result");
    NotNull(agent_counts, "agent_counts");
    NotNull(options, "options");
    NotNull(out, "out");
    CheckShapes(model, result);
    const int n = ResolveHorizon(result, options->horizon);
    std::vector<int> counts(agent_counts, agent_counts + num_counts);
    rsmfg::ConvergenceStudy study = rsmfg::ConvergenceStudyRun(
        model->model, result->result.policy, result->result.flow, counts, n,
        options->replications, options->seed, options->threads);
    *out = CopyString(options->format == RSMFG_FORMAT_CSV
                          ? rsmfg::ToCsv(study)
                          : rsmfg::ToJson(study).dump(2));
  });
}

rsmfg_status rsmfg_nash_gap(const rsmfg_model* model,
                            const rsmfg_result* result,
                            const rsmfg_sim_options* options, char** out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(result, "result");
    NotNull(options, "options");
    NotNull(out, "out");
    CheckShapes(model, result);
    const int n = ResolveHorizon(result, options->horizon);
    rsmfg::NashGapEstimate estimate = rsmfg::NashGap(
        model->model, result->result.policy, result->result.flow,
        options->num_agents, n, options->replications, options->seed,
        options->threads);
    *out = CopyString(options->format == RSMFG_FORMAT_CSV
                          ? rsmfg::ToCsv(estimate)
                          : rsmfg::ToJson(estimate).dump(2));
  });
}

rsmfg_status rsmfg_joint_oracle(const rsmfg_model* model,
                                const rsmfg_result* result, int num_agents,
                                int horizon, char** json_out) {
  return Guard([&] {
    NotNull(model, "model");
    NotNull(result, "result");
    NotNull(json_out, "json_out");
    CheckShapes(model, result);
    const int n = ResolveHorizon(result, horizon);
    rsmfg::JointOracleResult r = rsmfg::JointDpOracle(
        model->model, result->result.policy, num_agents, n);
    Json doc = {{"N", num_agents},
                {"horizon", n},
                {"best_response_value", r.best_response_value},
                {"equilibrium_value", r.equilibrium_value},
                {"gap", r.gap()}};
    if (std::isfinite(r.markov_best_response_value)) {
      doc["markov_best_response_value"] = r.markov_best_response_value;
      doc["markov_gap"] = r.equilibrium_value - r.markov_best_response_value;
    } else {
      doc["markov_best_response_value"] = nullptr;
    }
    *json_out = CopyString(doc.dump(2));
  });
}

}  // extern "C"
