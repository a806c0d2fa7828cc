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

// Exercises the shared library strictly through its C interface.

#include "rsmfg/rsmfg.h"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace {

using Json = nlohmann::json;

std::string DataPath(const std::string& name) {
  return std::string(RSMFG_DATA_DIR) + "/" + name;
}

std::string Take(char* s) {
  REQUIRE(s != nullptr);
  std::string out = s;
  rsmfg_string_free(s);
  return out;
}

struct Handles {
  rsmfg_model* model = nullptr;
  rsmfg_result* result = nullptr;
  ~Handles() {
    rsmfg_result_free(result);
    rsmfg_model_free(model);
  }
};

void Solve(const std::string& file, Handles& h) {
  REQUIRE(rsmfg_model_load(DataPath(file).c_str(), &h.model) == RSMFG_OK);
  rsmfg_solve_options opts;
  rsmfg_solve_options_init(&opts);
  REQUIRE(rsmfg_solve(h.model, &opts, &h.result) == RSMFG_OK);
}

TEST_CASE("Version and null handling") {
  CHECK(std::strlen(rsmfg_version()) > 0);
  rsmfg_model* m = nullptr;
  CHECK(rsmfg_model_load(nullptr, &m) == RSMFG_ERR_INVALID_ARGUMENT);
  CHECK(std::strlen(rsmfg_last_error()) > 0);
  rsmfg_model_free(nullptr);
  rsmfg_result_free(nullptr);
  rsmfg_string_free(nullptr);
  CHECK(rsmfg_result_converged(nullptr) == 0);
}

TEST_CASE("Load errors map to status codes") {
  rsmfg_model* m = nullptr;
  CHECK(rsmfg_model_load("/nonexistent.json", &m) == RSMFG_ERR_IO);
  CHECK(rsmfg_model_parse("{", &m) == RSMFG_ERR_PARSE);
  Json doc = Json::parse(std::ifstream(DataPath("congestion.json")));
  doc["beta"] = 1.0;
  CHECK(rsmfg_model_parse(doc.dump().c_str(), &m) == RSMFG_ERR_VALIDATION);
  CHECK(std::string(rsmfg_last_error()).find("beta") != std::string::npos);
  CHECK(m == nullptr);
}

TEST_CASE("Diagnostics") {
  Handles h;
  REQUIRE(rsmfg_model_load(DataPath("decoupled.json").c_str(), &h.model) == RSMFG_OK);
  CHECK(rsmfg_model_num_states(h.model) == 2);
  CHECK(rsmfg_model_num_actions(h.model) == 2);
  char* json = nullptr;
  REQUIRE(rsmfg_model_diagnostics(h.model, &json) == RSMFG_OK);
  Json d = Json::parse(Take(json));
  CHECK(d["lipschitz"]["kernel"] == 0.0);
  CHECK(d["valid"] == true);
}

TEST_CASE("Solve, serialize, reload and verify") {
  Handles h;
  Solve("congestion.json", h);
  CHECK(rsmfg_result_converged(h.result) == 1);
  CHECK(rsmfg_result_horizon(h.result) > 0);
  char* json = nullptr;
  REQUIRE(rsmfg_result_to_json(h.result, &json) == RSMFG_OK);
  std::string text = Take(json);
  rsmfg_result* again = nullptr;
  REQUIRE(rsmfg_result_parse(text.c_str(), &again) == RSMFG_OK);
  char* report = nullptr;
  int passed = 0;
  REQUIRE(rsmfg_verify(h.model, again, nullptr, &report, &passed) == RSMFG_OK);
  Json r = Json::parse(Take(report));
  CHECK(passed == 1);
  CHECK(r["mfe_residual"]["pass"] == true);
  CHECK(r["optimality_certificate"]["pass"] == true);
  CHECK(r["duality"]["pass"] == true);
  CHECK(r["augmented"]["pass"] == true);
  rsmfg_result_free(again);
}

TEST_CASE("Verify rejects a result for a different model") {
  Handles a, b;
  Solve("congestion.json", a);
  Solve("weakly_coupled.json", b);
  char* report = nullptr;
  int passed = 1;
  CHECK(rsmfg_verify(a.model, b.result, nullptr, &report, &passed) ==
        RSMFG_ERR_VALIDATION);
}

TEST_CASE("Non-convergence is reported through the result") {
  Handles h;
  Solve("anticoordination.json", h);
  CHECK(rsmfg_result_converged(h.result) == 0);
}

TEST_CASE("Simulation outputs") {
  Handles h;
  Solve("zero_cost.json", h);
  rsmfg_sim_options o;
  rsmfg_sim_options_init(&o);
  o.num_agents = 5;
  o.replications = 20;
  char* out = nullptr;
  REQUIRE(rsmfg_simulate(h.model, h.result, &o, &out) == RSMFG_OK);
  Json j = Json::parse(Take(out));
  CHECK(j["pooled_mean"] == 1.0);
  CHECK(j["reference_value"] == 1.0);

  o.format = RSMFG_FORMAT_CSV;
  int counts[] = {2, 4};
  REQUIRE(rsmfg_convergence(h.model, h.result, counts, 2, &o, &out) == RSMFG_OK);
  CHECK(Take(out).rfind("N,estimate,stderr,abs_error,mean_tv_by_t", 0) == 0);

  o.format = RSMFG_FORMAT_JSON;
  REQUIRE(rsmfg_nash_gap(h.model, h.result, &o, &out) == RSMFG_OK);
  CHECK(Json::parse(Take(out))["gap"] == 0.0);

  o.horizon = 1000000;
  CHECK(rsmfg_simulate(h.model, h.result, &o, &out) == RSMFG_ERR_INVALID_ARGUMENT);
  o.horizon = -1;
  o.num_agents = 0;
  CHECK(rsmfg_simulate(h.model, h.result, &o, &out) == RSMFG_ERR_INVALID_ARGUMENT);
}

TEST_CASE("Joint oracle through the C interface") {
  Handles h;
  Solve("congestion.json", h);
  char* out = nullptr;
  REQUIRE(rsmfg_joint_oracle(h.model, h.result, 2, 2, &out) == RSMFG_OK);
  Json j = Json::parse(Take(out));
  CHECK(j["gap"].get<double>() >= -1e-12);
  CHECK(rsmfg_joint_oracle(h.model, h.result, 4, 2, &out) == RSMFG_ERR_CAP_EXCEEDED);
}

}  // namespace
