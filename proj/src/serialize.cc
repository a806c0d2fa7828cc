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

#include "rsmfg/serialize.h"

#include <cmath>
#include <sstream>

#include "rsmfg/error.h"

namespace rsmfg {
namespace {

Json Matrix(const std::vector<std::vector<double>>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back(r);
  return out;
}

// NaN and infinities are not JSON; they become null.
Json Number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

std::string JoinTv(const std::vector<double>& values) {
  std::ostringstream out;
  out.precision(17);
  for (size_t i = 0; i < values.size(); ++i) {
    if (i) out << ';';
    out << values[i];
  }
  return out.str();
}

}  // namespace

Json ToJson(const ValueTable& table) {
  Json rows = Json::array();
  for (int k = 0; k <= table.horizon() + 1; ++k) {
    Json row = Json::array();
    for (int x = 0; x < table.num_states(); ++x) {
      row.push_back(Number(table.Value(k, x)));
    }
    rows.push_back(std::move(row));
  }
  Json out = {{"horizon", table.horizon()}, {"values", std::move(rows)}};
  if (table.log_scale()) {
    Json logs = Json::array();
    for (int k = 0; k <= table.horizon() + 1; ++k) {
      Json row = Json::array();
      for (int x = 0; x < table.num_states(); ++x) {
        row.push_back(table.LogValue(k, x));
      }
      logs.push_back(std::move(row));
    }
    out["log_values"] = std::move(logs);
  }
  return out;
}

Json ToJson(const OptimalityCertificate& c) {
  return {{"masses", c.masses},
          {"tolerance", c.tolerance},
          {"pass", c.pass},
          {"first_failure", c.first_failure}};
}

Json ToJson(const MarkovPolicy& policy) {
  const int nx = policy.num_states();
  const int na = policy.num_actions();
  Json out = Json::array();
  for (int t = 0; t < policy.length(); ++t) {
    Json rule = Json::array();
    for (int x = 0; x < nx; ++x) {
      auto row = policy.row(t, x);
      rule.push_back(std::vector<double>(row.begin(), row.begin() + na));
    }
    out.push_back(std::move(rule));
  }
  return out;
}

Json ToJson(const MeasureFlow& flow) {
  Json out = Json::array();
  for (const Dist& mu : flow.mus) out.push_back(mu.vec());
  return out;
}

Json ToJson(const MfeResult& r) {
  Json attempts = Json::array();
  for (const AttemptOutcome& a : r.attempts) {
    attempts.push_back({{"iterations", a.iterations},
                        {"step", Number(a.step)},
                        {"consistency", Number(a.consistency)},
                        {"gap", Number(a.gap)},
                        {"converged", a.converged}});
  }
  return {{"converged", r.converged},
          {"iterations", r.iterations},
          {"horizon", r.horizon},
          {"consistency_residual", Number(r.consistency_residual)},
          {"optimality_gap", Number(r.optimality_gap)},
          {"consistency_tolerance", r.consistency_tolerance},
          {"gap_tolerance", r.gap_tolerance},
          {"truncation_error", r.truncation_error},
          {"attempts", std::move(attempts)},
          {"policy", ToJson(r.policy)},
          {"flow", ToJson(r.flow)}};
}

Json ToJson(const AtomMeasure& atoms) {
  Json out = Json::array();
  for (const AugmentedAtom& a : atoms) out.push_back({a.x, a.c, a.weight});
  return out;
}

Json ToJson(const IsaacsTable& table, const ValueTable& values) {
  Json rows = Json::array();
  double worst = 0.0;
  for (int k = 0; k <= table.horizon() + 1; ++k) {
    Json row = Json::array();
    for (int x = 0; x < values.num_states(); ++x) {
      row.push_back(table.w(k, x));
      const double rel = std::abs(std::expm1(table.w(k, x) - values.LogValue(k, x)));
      worst = std::max(worst, rel);
    }
    rows.push_back(std::move(row));
  }
  return {{"w", std::move(rows)}, {"max_identity_residual", worst}};
}

Json ToJson(const SimReport& r) {
  Json out = {{"num_agents", r.num_agents},
              {"horizon", r.horizon},
              {"replications", r.replications},
              {"seed", r.seed},
              {"agent_mean", r.agent_mean},
              {"agent_stderr", r.agent_stderr},
              {"pooled_mean", r.pooled_mean},
              {"pooled_stderr", r.pooled_stderr},
              {"mean_flow", Matrix(r.mean_flow)}};
  if (!r.tv_mean_by_t.empty()) {
    out["tv_mean_by_t"] = r.tv_mean_by_t;
    out["tv_stderr_by_t"] = r.tv_stderr_by_t;
  }
  if (!r.tv_by_replication.empty()) {
    out["tv_by_replication"] = Matrix(r.tv_by_replication);
  }
  return out;
}

Json ToJson(const ConvergenceStudy& s) {
  Json rows = Json::array();
  for (const StudyRow& row : s.rows) {
    rows.push_back({{"N", row.num_agents},
                    {"estimate", row.estimate},
                    {"stderr", row.std_error},
                    {"abs_error", row.abs_error},
                    {"mean_tv_by_t", row.mean_tv_by_t},
                    {"tv_stderr_by_t", row.tv_stderr_by_t}});
  }
  return {{"horizon", s.horizon},
          {"reference_value", s.reference_value},
          {"truncation_error", s.truncation_error},
          {"rows", std::move(rows)}};
}

Json ToJson(const NashGapEstimate& e) {
  return {{"N", e.num_agents},
          {"equilibrium_estimate", e.equilibrium_estimate},
          {"equilibrium_stderr", e.equilibrium_stderr},
          {"deviation_estimate", e.deviation_estimate},
          {"deviation_stderr", e.deviation_stderr},
          {"gap", e.gap},
          {"gap_stderr", e.gap_stderr},
          {"best_response", ToJson(e.best_response)}};
}

MfeResult MfeResultFromJson(const Json& doc) {
  try {
    if (!doc.is_object()) Fail(ErrorCode::kParse, "result must be an object");
    const Json& policy = doc.at("policy");
    const Json& flow = doc.at("flow");
    if (!policy.is_array() || policy.empty() || !flow.is_array() ||
        flow.empty()) {
      Fail(ErrorCode::kParse, "result policy and flow must be non-empty arrays");
    }
    const int nx = static_cast<int>(policy[0].size());
    if (nx == 0) Fail(ErrorCode::kParse, "policy has no states");
    const int na = static_cast<int>(policy[0][0].size());
    std::vector<std::vector<double>> rules;
    for (const Json& rule : policy) {
      if (static_cast<int>(rule.size()) != nx) {
        Fail(ErrorCode::kParse, "policy rules disagree on the state count");
      }
      std::vector<double> flat;
      for (const Json& row : rule) {
        if (static_cast<int>(row.size()) != na) {
          Fail(ErrorCode::kParse, "policy rows disagree on the action count");
        }
        for (const Json& v : row) flat.push_back(v.get<double>());
      }
      rules.push_back(std::move(flat));
    }
    MfeResult r;
    r.policy = MarkovPolicy(nx, na, std::move(rules));
    for (const Json& mu : flow) {
      r.flow.mus.emplace_back(mu.get<std::vector<double>>());
    }
    r.horizon = doc.value("horizon", r.flow.horizon());
    r.converged = doc.value("converged", false);
    r.iterations = doc.value("iterations", 0);
    auto scalar = [&](const char* key) {
      auto it = doc.find(key);
      return it != doc.end() && it->is_number() ? it->get<double>() : 0.0;
    };
    r.consistency_residual = scalar("consistency_residual");
    r.optimality_gap = scalar("optimality_gap");
    r.consistency_tolerance = scalar("consistency_tolerance");
    r.gap_tolerance = scalar("gap_tolerance");
    r.truncation_error = scalar("truncation_error");
    if (auto it = doc.find("attempts"); it != doc.end() && it->is_array()) {
      for (const Json& a : *it) {
        AttemptOutcome o;
        o.iterations = a.value("iterations", 0);
        o.converged = a.value("converged", false);
        auto field = [&](const char* key) {
          auto f = a.find(key);
          return f != a.end() && f->is_number() ? f->get<double>() : NAN;
        };
        o.step = field("step");
        o.consistency = field("consistency");
        o.gap = field("gap");
        r.attempts.push_back(o);
      }
    }
    return r;
  } catch (const Json::exception& e) {
    Fail(ErrorCode::kParse, std::string("malformed result document: ") + e.what());
  }
}

std::string ToCsv(const ConvergenceStudy& study) {
  std::ostringstream out;
  out.precision(17);
  out << "N,estimate,stderr,abs_error,mean_tv_by_t\n";
  for (const StudyRow& row : study.rows) {
    out << row.num_agents << ',' << row.estimate << ',' << row.std_error << ','
        << row.abs_error << ',' << JoinTv(row.mean_tv_by_t) << '\n';
  }
  return out.str();
}

std::string ToCsv(const SimReport& report, double reference_value) {
  std::ostringstream out;
  out.precision(17);
  out << "N,estimate,stderr,abs_error,mean_tv_by_t\n";
  out << report.num_agents << ',' << report.pooled_mean << ','
      << report.pooled_stderr << ','
      << std::abs(report.pooled_mean - reference_value) << ','
      << JoinTv(report.tv_mean_by_t) << '\n';
  return out.str();
}

std::string ToCsv(const NashGapEstimate& e) {
  std::ostringstream out;
  out.precision(17);
  out << "N,equilibrium_estimate,equilibrium_stderr,deviation_estimate,"
         "deviation_stderr,gap,gap_stderr\n";
  out << e.num_agents << ',' << e.equilibrium_estimate << ','
      << e.equilibrium_stderr << ',' << e.deviation_estimate << ','
      << e.deviation_stderr << ',' << e.gap << ',' << e.gap_stderr << '\n';
  return out.str();
}

}  // namespace rsmfg
