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

#ifndef RSMFG_SERIALIZE_H_
#define RSMFG_SERIALIZE_H_

#include <string>

#include "json.hpp"
#include "rsmfg/augmented.h"
#include "rsmfg/duality.h"
#include "rsmfg/mfe_solver.h"
#include "rsmfg/risk_dp.h"
#include "rsmfg/simulator.h"

namespace rsmfg {

using Json = nlohmann::json;

Json ToJson(const ValueTable& table);
Json ToJson(const OptimalityCertificate& certificate);
Json ToJson(const MarkovPolicy& policy);
Json ToJson(const MeasureFlow& flow);
Json ToJson(const MfeResult& result);
Json ToJson(const AtomMeasure& atoms);
// W table and the largest relative deviation of exp(W) from `values`.
Json ToJson(const IsaacsTable& table, const ValueTable& values);
Json ToJson(const SimReport& report);
Json ToJson(const ConvergenceStudy& study);
Json ToJson(const NashGapEstimate& estimate);

// Reads the "policy" ([t][x][a]) and "flow" ([t][x]) arrays of a result
// document, along with any scalar fields present. Throws Error(kParse).
MfeResult MfeResultFromJson(const Json& doc);

// CSV projections. Columns: N, estimate, stderr, abs_error, mean_tv_by_t
// (the last one as ';'-separated values).
std::string ToCsv(const ConvergenceStudy& study);
std::string ToCsv(const SimReport& report, double reference_value);
std::string ToCsv(const NashGapEstimate& estimate);

}  // namespace rsmfg

#endif  // RSMFG_SERIALIZE_H_
