// Copyright 2026 The tfqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfqkd {

enum class ErrorCode {
  invalid_argument,
  degenerate_intensities,
  ordering_violation,
  inconsistent_gains,
  range_error,
  saturation,
  undefined_statistic,
  infeasible,
  infeasible_fluctuation,
  size_limit,
  schema_mismatch,
  io_error,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::degenerate_intensities: return "degenerate-intensities";
    case ErrorCode::ordering_violation: return "ordering-violation";
    case ErrorCode::inconsistent_gains: return "inconsistent-gains";
    case ErrorCode::range_error: return "range-error";
    case ErrorCode::saturation: return "saturation";
    case ErrorCode::undefined_statistic: return "undefined-statistic";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::infeasible_fluctuation: return "infeasible-fluctuation";
    case ErrorCode::size_limit: return "size-limit";
    case ErrorCode::schema_mismatch: return "schema-mismatch";
    case ErrorCode::io_error: return "io-error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, std::string(to_string(code)) + ": " + what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace tfqkd
