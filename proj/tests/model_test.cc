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

#include <cmath>
#include <random>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "oracles.h"
#include "rsmfg/error.h"

namespace rsmfg {
namespace {

using testing::MakeModel;

constexpr const char* kTwoByTwo = R"({
  "num_states": 2, "num_actions": 2, "beta": 0.5, "lambda": 1.0,
  "mu0": [0.5, 0.5],
  "kernel_mix": [[[[1, 0], [0, 1]], [[1, 0], [0, 1]]],
                 [[[0, 1], [1, 0]], [[0, 1], [1, 0]]]],
  "cost_mix": [[[0, 1], [0.5, 0.5]], [[1, 0], [0.2, 0.4]]]
})";

std::string Mutate(const std::string& key, const nlohmann::json& value) {
  nlohmann::json doc = nlohmann::json::parse(kTwoByTwo);
  doc[key] = value;
  return doc.dump();
}

ErrorCode ParseError(const std::string& text) {
  try {
    ParseModel(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kIo;
}

std::string ParseMessage(const std::string& text) {
  try {
    ParseModel(text);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST_CASE("Well-formed file loads") {
  MfgModel m = ParseModel(kTwoByTwo);
  CHECK(m.num_states() == 2);
  CHECK(m.num_actions() == 2);
  CHECK(m.cost_bound() == 1.0);
  CHECK(m.warnings().empty());
}

TEST_CASE("Model round-trips through JSON") {
  MfgModel m = ParseModel(kTwoByTwo);
  MfgModel again = ParseModel(ModelToJson(m));
  CHECK(again.kernel_mix() == m.kernel_mix());
  CHECK(again.cost_mix() == m.cost_mix());
  CHECK(again.beta() == m.beta());
}

TEST_CASE("Kernel row summing to 0.9 names its index path") {
  nlohmann::json doc = nlohmann::json::parse(kTwoByTwo);
  doc["kernel_mix"][1][0][1] = {0.9, 0.0};
  std::string msg = ParseMessage(doc.dump());
  CHECK(msg.find("kernel_mix[1][0][1]") != std::string::npos);
  CHECK(ParseError(doc.dump()) == ErrorCode::kValidation);
}

TEST_CASE("beta = 1 is rejected") {
  std::string msg = ParseMessage(Mutate("beta", 1.0));
  CHECK(msg.find("beta must lie in open interval") != std::string::npos);
}

TEST_CASE("Other validation failures") {
  CHECK(ParseError(Mutate("lambda", 0.0)) == ErrorCode::kValidation);
  CHECK(ParseError(Mutate("mu0", {0.7, 0.7})) == ErrorCode::kValidation);
  CHECK(ParseError(Mutate("cost_bound", 0.5)) == ErrorCode::kValidation);
  nlohmann::json doc = nlohmann::json::parse(kTwoByTwo);
  doc["cost_mix"][0][1][1] = -0.1;
  CHECK(ParseMessage(doc.dump()).find("cost_mix[0][1][1]") !=
        std::string::npos);
}

TEST_CASE("Malformed input is a parse error") {
  CHECK(ParseError("{not json") == ErrorCode::kParse);
  CHECK(ParseError(Mutate("kernel_mix", {1, 2})) == ErrorCode::kParse);
  CHECK(ParseError(R"({"num_states": 2})") == ErrorCode::kParse);
}

TEST_CASE("Missing file is an IO error") {
  try {
    LoadModel("/nonexistent/model.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kIo);
  }
}

TEST_CASE("Large lambda K / (1 - beta) warns about log space") {
  MfgModel m = ParseModel(Mutate("lambda", 300.0));
  CHECK(m.needs_log_space());
  CHECK(m.warnings().size() == 1);
}

TEST_CASE("KernelAt examples") {
  MfgModel m = ParseModel(kTwoByTwo);
  // Dirac weight picks the component.
  Dist k0 = KernelAt(m, 0, 1, Dist::Dirac(2, 1));
  CHECK(k0[0] == 1.0);
  CHECK(k0[1] == 0.0);
  // Components (1, 0) and (0, 1) averaged.
  Dist mid = KernelAt(m, 0, 0, Dist::Uniform(2));
  CHECK(mid[0] == 0.5);
  CHECK(mid[1] == 0.5);
  CHECK_THROWS_AS(KernelAt(m, 2, 0, Dist::Uniform(2)), Error);
}

TEST_CASE("KernelAt with identical components ignores mu") {
  MfgModel m = MakeModel(0.5, 1.0, {1, 0},
                         {{{{0.3, 0.7}}, {{0.6, 0.4}}},
                          {{{0.3, 0.7}}, {{0.6, 0.4}}}},
                         {{{0, 0}}, {{0, 0}}});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10; ++i) {
    Dist mu = Dist::Renormalized(testing::RandomSimplexPoint(rng, 2));
    Dist p = KernelAt(m, 1, 0, mu);
    CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-14));
  }
}

TEST_CASE("CostAt examples") {
  MfgModel m = ParseModel(kTwoByTwo);
  CHECK(CostAt(m, 0, 0, Dist::Uniform(2)) == 0.5);
  CHECK(CostAt(m, 1, 0, Dist::Dirac(2, 0)) == 1.0);
  CHECK(CostAt(m, 1, 1, Dist::Dirac(2, 1)) == 0.4);
  CHECK_THROWS_AS(CostAt(m, 0, 2, Dist::Uniform(2)), Error);
}

TEST_CASE("Lipschitz constants") {
  MfgModel m = ParseModel(kTwoByTwo);
  LipschitzConstants lip = ComputeLipschitzConstants(m);
  CHECK(lip.kernel == 1.0);
  // cost_mix[0][0] = (0, K) with K = 1.
  CHECK(lip.cost == 1.0);
  MfgModel decoupled = LoadModel(testing::DataPath("decoupled.json"));
  CHECK(ComputeLipschitzConstants(decoupled).kernel == 0.0);
  CHECK(ComputeLipschitzConstants(decoupled).cost == 0.0);
}

TEST_CASE("Lipschitz constants match a simplex-pair grid on 2 states") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    MfgModel m = testing::RandomModel(rng, {.num_states = 2, .num_actions = 2});
    LipschitzConstants lip = ComputeLipschitzConstants(m);
    double grid_p = 0.0, grid_c = 0.0;
    for (int i = 0; i <= 100; ++i) {
      for (int j = 0; j < i; ++j) {
        Dist mu({i / 100.0, 1 - i / 100.0});
        Dist nu({j / 100.0, 1 - j / 100.0});
        const double r = TotalVariation(mu, nu);
        for (int x = 0; x < 2; ++x) {
          for (int a = 0; a < 2; ++a) {
            grid_p = std::max(
                grid_p,
                TotalVariation(KernelAt(m, x, a, mu), KernelAt(m, x, a, nu)) / r);
            grid_c = std::max(
                grid_c, std::abs(CostAt(m, x, a, mu) - CostAt(m, x, a, nu)) / r);
          }
        }
      }
    }
    CHECK(lip.kernel == doctest::Approx(grid_p).epsilon(1e-9));
    CHECK(lip.cost == doctest::Approx(grid_c).epsilon(1e-9));
  }
}

TEST_CASE("Mixture invariants on random models") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    MfgModel m = testing::RandomModel(rng, {.num_states = 3, .num_actions = 2});
    LipschitzConstants lip = ComputeLipschitzConstants(m);
    Dist mu = Dist::Renormalized(testing::RandomSimplexPoint(rng, 3));
    Dist nu = Dist::Renormalized(testing::RandomSimplexPoint(rng, 3));
    const double alpha = std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<double> mix(3);
    for (int i = 0; i < 3; ++i) mix[i] = alpha * mu[i] + (1 - alpha) * nu[i];
    Dist mixed = Dist::Renormalized(mix);
    for (int x = 0; x < 3; ++x) {
      for (int a = 0; a < 2; ++a) {
        Dist p = KernelAt(m, x, a, mu);
        double sum = 0.0;
        for (double w : p.weights()) {
          CHECK(w >= 0.0);
          sum += w;
        }
        CHECK(std::abs(sum - 1.0) <= 1e-12);
        const double affine = alpha * CostAt(m, x, a, mu) +
                              (1 - alpha) * CostAt(m, x, a, nu);
        CHECK(std::abs(CostAt(m, x, a, mixed) - affine) <= 1e-12);
        CHECK(std::abs(CostAt(m, x, a, mu) - CostAt(m, x, a, nu)) <=
              lip.cost * TotalVariation(mu, nu) + 1e-12);
      }
    }
  }
}

}  // namespace
}  // namespace rsmfg
