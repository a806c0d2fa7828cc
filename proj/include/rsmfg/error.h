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

#ifndef RSMFG_ERROR_H_
#define RSMFG_ERROR_H_

#include <stdexcept>
#include <string>

namespace rsmfg {

// Failure categories. The numeric values double as CLI exit codes where the
// CLI defines one (2 validation, 3 non-convergence, 4 cap exceeded).
enum class ErrorCode {
  kParse = 1,
  kValidation = 2,
  kNotConverged = 3,
  kCapExceeded = 4,
  kInvalidArgument = 5,
  kIo = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void Require(bool condition, const std::string& what) {
  if (!condition) Fail(ErrorCode::kInvalidArgument, what);
}

}  // namespace rsmfg

#endif  // RSMFG_ERROR_H_
