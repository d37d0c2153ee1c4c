// Copyright 2026 The tdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDP_ERROR_HPP_
#define TDP_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace tdp {

enum class ErrorCode {
  kInvalidArgument,
  kNegativeWeight,
  kZeroMass,
  kLengthMismatch,
  kNotEmpirical,
  kBadIndex,
  kDisconnected,
  kSolverFailure,
  kSpaceMismatch,
  kMissingLaplacian,
  kStepTooLarge,
  kMissingGraph,
  kParseError,
  kIoError,
};

constexpr std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kNegativeWeight: return "NegativeWeight";
    case ErrorCode::kZeroMass: return "ZeroMass";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNotEmpirical: return "NotEmpirical";
    case ErrorCode::kBadIndex: return "BadIndex";
    case ErrorCode::kDisconnected: return "Disconnected";
    case ErrorCode::kSolverFailure: return "SolverFailure";
    case ErrorCode::kSpaceMismatch: return "SpaceMismatch";
    case ErrorCode::kMissingLaplacian: return "MissingLaplacian";
    case ErrorCode::kStepTooLarge: return "StepTooLarge";
    case ErrorCode::kMissingGraph: return "MissingGraph";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

// All library failures are reported through this exception type; code()
// distinguishes the failure class.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tdp

#endif  // TDP_ERROR_HPP_
