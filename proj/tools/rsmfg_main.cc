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

// Command-line front end. Every run writes a manifest next to its output
// (or to stderr when the output goes to stdout) from which `rsmfg replay`
// reproduces the output bytes.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rsmfg/rsmfg.h"

namespace {

using Json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCapExceeded = 4;

// Failure carrying the process exit code.
struct CliError {
  int exit_code;
  std::string message;
};

int ExitCodeFor(rsmfg_status status) {
  switch (status) {
    case RSMFG_OK: return kExitOk;
    case RSMFG_ERR_NOT_CONVERGED: return kExitNotConverged;
    case RSMFG_ERR_CAP_EXCEEDED: return kExitCapExceeded;
    default: return kExitValidation;
  }
}

void Check(rsmfg_status status) {
  if (status != RSMFG_OK) {
    throw CliError{ExitCodeFor(status), rsmfg_last_error()};
  }
}

struct ModelDeleter {
  void operator()(rsmfg_model* m) const { rsmfg_model_free(m); }
};
struct ResultDeleter {
  void operator()(rsmfg_result* r) const { rsmfg_result_free(r); }
};
using ModelPtr = std::unique_ptr<rsmfg_model, ModelDeleter>;
using ResultPtr = std::unique_ptr<rsmfg_result, ResultDeleter>;

// Takes ownership of a string allocated by the library.
std::string Adopt(char* s) {
  std::string out = s ? s : "";
  rsmfg_string_free(s);
  return out;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError{kExitValidation, "cannot open " + path};
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CliError{kExitValidation, "cannot write " + path};
  out << contents;
  if (!out) throw CliError{kExitValidation, "failed writing " + path};
}

std::string Fnv1a64Hex(const std::string& bytes) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string Absolute(const std::string& path) {
  if (path.empty()) return path;
  return std::filesystem::absolute(path).lexically_normal().string();
}

// Fully resolved options of one run; this is what a manifest records.
struct RunConfig {
  std::string command;
  std::string model_path;
  std::string result_path;
  std::string out_path;
  std::string format = "json";
  double tol_dp = 1e-6;
  double tol_fp = 1e-8;
  int max_iter = 1000;
  double damping = 1.0;
  int restarts = 3;
  double tol = 1e-6;
  std::vector<int> agents;
  int horizon = -1;
  int reps = 1000;
  uint64_t seed = 0;
  int threads = 0;
};

Json ConfigToJson(const RunConfig& c) {
  Json j = {{"model", c.model_path}};
  if (c.command == "validate") return j;
  if (c.command == "solve-mfe") {
    j["tol_dp"] = c.tol_dp;
    j["tol_fp"] = c.tol_fp;
    j["max_iter"] = c.max_iter;
    j["damping"] = c.damping;
    j["restarts"] = c.restarts;
    return j;
  }
  j["result"] = c.result_path;
  if (c.command == "verify") {
    j["tol"] = c.tol;
    return j;
  }
  j["agents"] = c.agents;
  j["horizon"] = c.horizon;
  j["reps"] = c.reps;
  j["seed"] = c.seed;
  j["format"] = c.format;
  j["threads"] = c.threads;
  return j;
}

RunConfig ConfigFromManifest(const Json& manifest) {
  RunConfig c;
  try {
    c.command = manifest.at("command").get<std::string>();
    const Json& j = manifest.at("config");
    c.model_path = j.at("model").get<std::string>();
    c.out_path = manifest.value("out", std::string());
    if (c.command == "solve-mfe") {
      c.tol_dp = j.at("tol_dp").get<double>();
      c.tol_fp = j.at("tol_fp").get<double>();
      c.max_iter = j.at("max_iter").get<int>();
      c.damping = j.at("damping").get<double>();
      c.restarts = j.at("restarts").get<int>();
    } else if (c.command != "validate") {
      c.result_path = j.at("result").get<std::string>();
      if (c.command == "verify") {
        c.tol = j.at("tol").get<double>();
      } else {
        c.agents = j.at("agents").get<std::vector<int>>();
        c.horizon = j.at("horizon").get<int>();
        c.reps = j.at("reps").get<int>();
        c.seed = j.at("seed").get<uint64_t>();
        c.format = j.at("format").get<std::string>();
        c.threads = j.at("threads").get<int>();
      }
    }
  } catch (const Json::exception& e) {
    throw CliError{kExitValidation, std::string("malformed manifest: ") + e.what()};
  }
  return c;
}

ModelPtr LoadModel(const std::string& path) {
  rsmfg_model* raw = nullptr;
  Check(rsmfg_model_load(path.c_str(), &raw));
  ModelPtr model(raw);
  for (size_t i = 0; i < rsmfg_model_warning_count(model.get()); ++i) {
    std::cerr << "warning: " << rsmfg_model_warning(model.get(), i) << "\n";
  }
  return model;
}

ResultPtr LoadResult(const std::string& path) {
  rsmfg_result* raw = nullptr;
  Check(rsmfg_result_load(path.c_str(), &raw));
  return ResultPtr(raw);
}

rsmfg_sim_options SimOptions(const RunConfig& c) {
  rsmfg_sim_options o;
  rsmfg_sim_options_init(&o);
  o.num_agents = c.agents.empty() ? 1 : c.agents.front();
  o.horizon = c.horizon;
  o.replications = c.reps;
  o.seed = c.seed;
  o.threads = c.threads;
  o.format = c.format == "csv" ? RSMFG_FORMAT_CSV : RSMFG_FORMAT_JSON;
  return o;
}

// Runs one command; fills `output` and returns the exit code.
int Execute(const RunConfig& c, std::string* output) {
  ModelPtr model = LoadModel(c.model_path);
  if (c.command == "validate") {
    char* json = nullptr;
    Check(rsmfg_model_diagnostics(model.get(), &json));
    *output = Adopt(json) + "\n";
    return kExitOk;
  }
  if (c.command == "solve-mfe") {
    rsmfg_solve_options o;
    rsmfg_solve_options_init(&o);
    o.tol_dp = c.tol_dp;
    o.tol_fp = c.tol_fp;
    o.max_iter = c.max_iter;
    o.damping = c.damping;
    o.restarts = c.restarts;
    rsmfg_result* raw = nullptr;
    Check(rsmfg_solve(model.get(), &o, &raw));
    ResultPtr result(raw);
    char* json = nullptr;
    Check(rsmfg_result_to_json(result.get(), &json));
    *output = Adopt(json) + "\n";
    if (!rsmfg_result_converged(result.get())) {
      std::cerr << "error: fixed-point iteration did not converge after "
                << rsmfg_result_iterations(result.get())
                << " iterations; result written with converged=false\n";
      return kExitNotConverged;
    }
    return kExitOk;
  }

  ResultPtr result = LoadResult(c.result_path);
  if (c.command == "verify") {
    rsmfg_verify_options o;
    rsmfg_verify_options_init(&o);
    o.tol = c.tol;
    char* json = nullptr;
    int passed = 0;
    Check(rsmfg_verify(model.get(), result.get(), &o, &json, &passed));
    *output = Adopt(json) + "\n";
    if (!passed) {
      std::cerr << "error: verification failed; see the report\n";
      return kExitValidation;
    }
    return kExitOk;
  }

  rsmfg_sim_options o = SimOptions(c);
  char* text = nullptr;
  if (c.command == "simulate") {
    Check(rsmfg_simulate(model.get(), result.get(), &o, &text));
    *output = Adopt(text);
  } else if (c.command == "convergence") {
    Check(rsmfg_convergence(model.get(), result.get(), c.agents.data(),
                            c.agents.size(), &o, &text));
    *output = Adopt(text);
  } else if (c.command == "nash-gap") {
    Check(rsmfg_nash_gap(model.get(), result.get(), &o, &text));
    *output = Adopt(text);
    const int n = c.horizon < 0 ? rsmfg_result_horizon(result.get()) : c.horizon;
    // At oracle scale the exact gap is attached to the JSON report.
    if (o.format == RSMFG_FORMAT_JSON && o.num_agents <= 3 && n <= 4) {
      char* exact = nullptr;
      Check(rsmfg_joint_oracle(model.get(), result.get(), o.num_agents, n,
                               &exact));
      Json doc = Json::parse(*output);
      doc["exact"] = Json::parse(Adopt(exact));
      *output = doc.dump(2);
    }
  } else {
    throw CliError{kExitValidation, "unknown command " + c.command};
  }
  if (output->empty() || output->back() != '\n') *output += "\n";
  return kExitOk;
}

// Runs a command, writes its output and its manifest.
int RunAndRecord(const RunConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  std::string output;
  int code = Execute(c, &output);
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  Json manifest = {{"command", c.command},
                   {"config", ConfigToJson(c)},
                   {"out", c.out_path},
                   {"model_hash", "fnv1a64:" + Fnv1a64Hex(ReadFile(c.model_path))},
                   {"seed", c.seed},
                   {"version", rsmfg_version()},
                   {"duration_seconds", seconds},
                   {"exit_code", code}};
  if (c.out_path.empty()) {
    std::cout << output;
    std::cerr << "manifest: " << manifest.dump() << "\n";
  } else {
    WriteFile(c.out_path, output);
    WriteFile(c.out_path + ".manifest.json", manifest.dump(2) + "\n");
  }
  return code;
}

int Replay(const std::string& manifest_path, const std::string& out_override) {
  Json manifest;
  try {
    manifest = Json::parse(ReadFile(manifest_path));
  } catch (const Json::exception& e) {
    throw CliError{kExitValidation, std::string("malformed manifest: ") + e.what()};
  }
  RunConfig c = ConfigFromManifest(manifest);
  if (!out_override.empty()) c.out_path = Absolute(out_override);
  const std::string recorded = manifest.value("model_hash", std::string());
  const std::string actual = "fnv1a64:" + Fnv1a64Hex(ReadFile(c.model_path));
  if (recorded != actual) {
    throw CliError{kExitValidation, "model file " + c.model_path +
                                        " changed since the manifest was "
                                        "written (hash " + actual + ", expected " +
                                        recorded + ")"};
  }
  return RunAndRecord(c);
}

int ResolveThreads(int flag) {
  if (flag > 0) return flag;
  if (const char* env = std::getenv("MFG_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw CliError{kExitValidation,
                   std::string("MFG_THREADS must be a positive integer, got '") +
                       env + "'"};
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-sensitive mean-field game solver and simulator"};
  app.set_version_flag("--version", rsmfg_version());
  app.require_subcommand(1);

  RunConfig c;
  int threads_flag = 0;
  std::string replay_manifest;

  auto* validate = app.add_subcommand("validate", "Check a model file and print diagnostics");
  auto* solve = app.add_subcommand("solve-mfe", "Compute a mean-field equilibrium");
  auto* verify = app.add_subcommand("verify", "Re-verify an equilibrium independently");
  auto* simulate = app.add_subcommand("simulate", "Simulate the N-agent game");
  auto* convergence = app.add_subcommand("convergence", "Estimation error as N grows");
  auto* nash = app.add_subcommand("nash-gap", "Estimate the unilateral deviation gain");
  auto* replay = app.add_subcommand("replay", "Re-run a command from its manifest");

  for (auto* sub : {validate, solve, verify, simulate, convergence, nash}) {
    sub->add_option("model", c.model_path, "Model JSON file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", c.out_path, "Output file (default: stdout)");
  }
  solve->add_option("--tol-dp", c.tol_dp, "Truncation tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--tol-fp", c.tol_fp, "Fixed-point tolerance")
      ->check(CLI::PositiveNumber);
  solve->add_option("--max-iter", c.max_iter, "Iteration cap per attempt")
      ->check(CLI::PositiveNumber);
  solve->add_option("--damping", c.damping, "Damping in (0, 1]")
      ->check(CLI::Range(0.0, 1.0));
  for (auto* sub : {verify, simulate, convergence, nash}) {
    sub->add_option("result", c.result_path, "Result JSON from solve-mfe")
        ->required()
        ->check(CLI::ExistingFile);
  }
  verify->add_option("--tol", c.tol, "Residual tolerance")
      ->check(CLI::PositiveNumber);
  for (auto* sub : {simulate, convergence, nash}) {
    sub->add_option("--horizon", c.horizon, "Horizon (default: the result's)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--reps", c.reps, "Replications")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "Master seed");
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--threads", threads_flag,
                    "Worker threads (fallback: MFG_THREADS)")
        ->check(CLI::PositiveNumber);
  }
  for (auto* sub : {simulate, nash}) {
    sub->add_option("--agents", c.agents, "Number of agents")
        ->expected(1)
        ->check(CLI::PositiveNumber);
  }
  convergence->add_option("--agents", c.agents, "Agent counts, e.g. 10,100,1000")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  replay->add_option("manifest", replay_manifest, "Manifest JSON")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", c.out_path, "Override the recorded output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (replay->parsed()) return Replay(replay_manifest, c.out_path);
    c.command = app.get_subcommands().front()->get_name();
    c.model_path = Absolute(c.model_path);
    c.result_path = Absolute(c.result_path);
    c.out_path = Absolute(c.out_path);
    if (c.agents.empty()) {
      c.agents = c.command == "convergence" ? std::vector<int>{10, 100, 1000}
                                             : std::vector<int>{100};
    }
    c.threads = ResolveThreads(threads_flag);
    return RunAndRecord(c);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << "\n";
    return e.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
