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

#include "rsmfg/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "rsmfg/error.h"

namespace rsmfg {
namespace {

using Json = nlohmann::json;

std::string IndexPath(std::initializer_list<int> indices) {
  std::ostringstream out;
  for (int i : indices) out << '[' << i << ']';
  return out.str();
}

[[noreturn]] void Invalid(const std::string& what) {
  Fail(ErrorCode::kValidation, what);
}

}  // namespace

MfgModel::MfgModel(Spec spec)
    : nx_(spec.num_states),
      na_(spec.num_actions),
      beta_(spec.beta),
      lambda_(spec.lambda),
      kernel_mix_(std::move(spec.kernel_mix)),
      cost_mix_(std::move(spec.cost_mix)) {
  if (nx_ < 1) Invalid("num_states must be at least 1");
  if (na_ < 1) Invalid("num_actions must be at least 1");
  if (!(beta_ > 0.0 && beta_ < 1.0)) {
    Invalid("beta must lie in open interval (0, 1)");
  }
  if (!(lambda_ > 0.0) || !std::isfinite(lambda_)) {
    Invalid("lambda must be positive");
  }
  if (static_cast<int>(spec.mu0.size()) != nx_) {
    Invalid("mu0 must have num_states entries");
  }
  std::string problem = CheckStochastic(spec.mu0, kLoadTolerance);
  if (!problem.empty()) Invalid("mu0: " + problem);
  mu0_ = Dist::Renormalized(std::move(spec.mu0));

  const size_t kernel_size = static_cast<size_t>(nx_) * nx_ * na_ * nx_;
  if (kernel_mix_.size() != kernel_size) {
    Invalid("kernel_mix must have shape [nx][nx][na][nx]");
  }
  for (int z = 0; z < nx_; ++z) {
    for (int x = 0; x < nx_; ++x) {
      for (int a = 0; a < na_; ++a) {
        std::span<double> row(
            kernel_mix_.data() +
                ((static_cast<size_t>(z) * nx_ + x) * na_ + a) * nx_,
            nx_);
        problem = CheckStochastic(row, kLoadTolerance);
        if (!problem.empty()) {
          Invalid("kernel_mix" + IndexPath({z, x, a}) + ": " + problem);
        }
        Dist fixed = Dist::Renormalized({row.begin(), row.end()});
        std::copy(fixed.vec().begin(), fixed.vec().end(), row.begin());
      }
    }
  }

  if (cost_mix_.size() != static_cast<size_t>(nx_) * na_ * nx_) {
    Invalid("cost_mix must have shape [nx][na][nx]");
  }
  double max_cost = 0.0;
  for (int x = 0; x < nx_; ++x) {
    for (int a = 0; a < na_; ++a) {
      for (int z = 0; z < nx_; ++z) {
        double c = component_cost(x, a, z);
        if (!std::isfinite(c) || c < 0.0) {
          Invalid("cost_mix" + IndexPath({x, a, z}) +
                  " must be finite and non-negative");
        }
        max_cost = std::max(max_cost, c);
      }
    }
  }
  if (spec.cost_bound < 0.0) {
    cost_bound_ = max_cost;
  } else {
    cost_bound_ = spec.cost_bound;
    if (!std::isfinite(cost_bound_)) Invalid("cost_bound must be finite");
    if (max_cost > cost_bound_) {
      std::ostringstream out;
      out << "cost_bound " << cost_bound_ << " is below the largest cost "
          << max_cost;
      Invalid(out.str());
    }
  }

  if (needs_log_space()) {
    std::ostringstream out;
    out << "lambda*K/(1-beta) = " << log_value_bound()
        << " exceeds " << kLogSpaceThreshold
        << "; value recursions run in log space";
    warnings_.push_back(out.str());
  }
}

std::span<const double> MfgModel::component_kernel(int z, int x,
                                                   int a) const {
  return {kernel_mix_.data() +
              ((static_cast<size_t>(z) * nx_ + x) * na_ + a) * nx_,
          static_cast<size_t>(nx_)};
}

namespace {

void CheckIndices(const MfgModel& model, int x, int a, const Dist& mu) {
  Require(x >= 0 && x < model.num_states(), "state index out of range");
  Require(a >= 0 && a < model.num_actions(), "action index out of range");
  Require(mu.size() == model.num_states(),
          "mean-field term has the wrong number of states");
}

}  // namespace

Dist KernelAt(const MfgModel& model, int x, int a, const Dist& mu) {
  CheckIndices(model, x, a, mu);
  const int nx = model.num_states();
  std::vector<double> out(nx, 0.0);
  for (int z = 0; z < nx; ++z) {
    if (mu[z] == 0.0) continue;
    auto k = model.component_kernel(z, x, a);
    for (int y = 0; y < nx; ++y) out[y] += mu[z] * k[y];
  }
  return Dist::Renormalized(std::move(out));
}

double CostAt(const MfgModel& model, int x, int a, const Dist& mu) {
  CheckIndices(model, x, a, mu);
  double c = 0.0;
  for (int z = 0; z < model.num_states(); ++z) {
    c += mu[z] * model.component_cost(x, a, z);
  }
  return c;
}

Stage MakeStage(const MfgModel& model, std::span<const double> mu) {
  const int nx = model.num_states();
  const int na = model.num_actions();
  Require(static_cast<int>(mu.size()) == nx,
          "mean-field term has the wrong number of states");
  Stage stage;
  stage.nx = nx;
  stage.na = na;
  stage.kernel.assign(static_cast<size_t>(nx) * na * nx, 0.0);
  stage.cost.assign(static_cast<size_t>(nx) * na, 0.0);
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < na; ++a) {
      double* row = stage.kernel.data() + (static_cast<size_t>(x) * na + a) * nx;
      double cost = 0.0;
      for (int z = 0; z < nx; ++z) {
        const double m = mu[z];
        cost += m * model.component_cost(x, a, z);
        if (m == 0.0) continue;
        auto k = model.component_kernel(z, x, a);
        for (int y = 0; y < nx; ++y) row[y] += m * k[y];
      }
      double sum = 0.0;
      for (int y = 0; y < nx; ++y) sum += row[y];
      for (int y = 0; y < nx; ++y) row[y] /= sum;
      stage.cost[static_cast<size_t>(x) * na + a] = cost;
    }
  }
  return stage;
}

LipschitzConstants ComputeLipschitzConstants(const MfgModel& model) {
  // Both maps are affine in mu, so the constant with respect to
  // TV = (1/2)||mu - mu'||_1 is the largest pairwise spread of the
  // components.
  LipschitzConstants out;
  const int nx = model.num_states();
  for (int x = 0; x < nx; ++x) {
    for (int a = 0; a < model.num_actions(); ++a) {
      for (int z = 0; z < nx; ++z) {
        for (int w = z + 1; w < nx; ++w) {
          out.kernel = std::max(
              out.kernel, TotalVariation(model.component_kernel(z, x, a),
                                         model.component_kernel(w, x, a)));
          out.cost = std::max(out.cost,
                              std::abs(model.component_cost(x, a, z) -
                                       model.component_cost(x, a, w)));
        }
      }
    }
  }
  return out;
}

namespace {

std::vector<double> FlattenArray(const Json& node, const std::string& key,
                                 std::vector<int> shape) {
  std::vector<double> out;
  // Walks the nested arrays depth-first checking each level's length.
  auto walk = [&](auto&& self, const Json& n, size_t depth,
                  std::string path) -> void {
    if (depth == shape.size()) {
      if (!n.is_number()) {
        Fail(ErrorCode::kParse, key + path + " must be a number");
      }
      out.push_back(n.get<double>());
      return;
    }
    if (!n.is_array() || static_cast<int>(n.size()) != shape[depth]) {
      Fail(ErrorCode::kParse, key + path + " must be an array of length " +
                                  std::to_string(shape[depth]));
    }
    for (size_t i = 0; i < n.size(); ++i) {
      self(self, n[i], depth + 1, path + "[" + std::to_string(i) + "]");
    }
  };
  walk(walk, node, 0, "");
  return out;
}

const Json& Field(const Json& doc, const char* key) {
  auto it = doc.find(key);
  if (it == doc.end()) {
    Fail(ErrorCode::kParse, std::string("missing key \"") + key + "\"");
  }
  return *it;
}

int IntField(const Json& doc, const char* key) {
  const Json& v = Field(doc, key);
  if (!v.is_number_integer()) {
    Fail(ErrorCode::kParse, std::string(key) + " must be an integer");
  }
  return v.get<int>();
}

double NumberField(const Json& doc, const char* key) {
  const Json& v = Field(doc, key);
  if (!v.is_number()) {
    Fail(ErrorCode::kParse, std::string(key) + " must be a number");
  }
  return v.get<double>();
}

}  // namespace

MfgModel ParseModel(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::parse_error& e) {
    Fail(ErrorCode::kParse, std::string("malformed model file: ") + e.what());
  }
  if (!doc.is_object()) Fail(ErrorCode::kParse, "model must be a JSON object");
  MfgModel::Spec spec;
  spec.num_states = IntField(doc, "num_states");
  spec.num_actions = IntField(doc, "num_actions");
  if (spec.num_states < 1 || spec.num_actions < 1) {
    Fail(ErrorCode::kValidation, "num_states and num_actions must be >= 1");
  }
  spec.beta = NumberField(doc, "beta");
  spec.lambda = NumberField(doc, "lambda");
  const int nx = spec.num_states;
  const int na = spec.num_actions;
  spec.mu0 = FlattenArray(Field(doc, "mu0"), "mu0", {nx});
  spec.kernel_mix =
      FlattenArray(Field(doc, "kernel_mix"), "kernel_mix", {nx, nx, na, nx});
  spec.cost_mix = FlattenArray(Field(doc, "cost_mix"), "cost_mix", {nx, na, nx});
  if (doc.contains("cost_bound") && !doc["cost_bound"].is_null()) {
    spec.cost_bound = NumberField(doc, "cost_bound");
    if (spec.cost_bound < 0.0) {
      Fail(ErrorCode::kValidation, "cost_bound must be non-negative");
    }
  }
  return MfgModel(std::move(spec));
}

MfgModel LoadModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open model file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseModel(buffer.str());
}

std::string ModelToJson(const MfgModel& model) {
  const int nx = model.num_states();
  const int na = model.num_actions();
  Json kernel = Json::array();
  for (int z = 0; z < nx; ++z) {
    Json zs = Json::array();
    for (int x = 0; x < nx; ++x) {
      Json xs = Json::array();
      for (int a = 0; a < na; ++a) {
        auto row = model.component_kernel(z, x, a);
        xs.push_back(std::vector<double>(row.begin(), row.end()));
      }
      zs.push_back(std::move(xs));
    }
    kernel.push_back(std::move(zs));
  }
  Json cost = Json::array();
  for (int x = 0; x < nx; ++x) {
    Json xs = Json::array();
    for (int a = 0; a < na; ++a) {
      std::vector<double> row(nx);
      for (int z = 0; z < nx; ++z) row[z] = model.component_cost(x, a, z);
      xs.push_back(std::move(row));
    }
    cost.push_back(std::move(xs));
  }
  Json doc = {{"num_states", nx},
              {"num_actions", na},
              {"beta", model.beta()},
              {"lambda", model.lambda()},
              {"mu0", model.mu0().vec()},
              {"kernel_mix", std::move(kernel)},
              {"cost_mix", std::move(cost)},
              {"cost_bound", model.cost_bound()}};
  return doc.dump(2);
}

}  // namespace rsmfg
