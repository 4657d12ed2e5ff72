// Copyright 2026 The dmpflight Authors
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

#ifndef DMPFLIGHT_ERROR_HPP_
#define DMPFLIGHT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dmpflight {

enum class ErrorCode {
  kInvalidArgument,
  kGoalZero,
  kDegenerateNormalizer,
  kStepSize,
  kTooFewSamples,
  kLengthMismatch,
  kBoundaryPeak,
  kBasisMismatch,
  kNonFinite,
  kSingularMetric,
  kNonHurwitz,
  kRollGuard,
  kDivergence,
  kParse,
};

// Broad class of a failure, used to pick a process exit status.
enum class ErrorClass { kData, kNumerical };

inline ErrorClass classify(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDegenerateNormalizer:
    case ErrorCode::kStepSize:
    case ErrorCode::kNonFinite:
    case ErrorCode::kSingularMetric:
    case ErrorCode::kNonHurwitz:
    case ErrorCode::kRollGuard:
    case ErrorCode::kDivergence:
      return ErrorClass::kNumerical;
    default:
      return ErrorClass::kData;
  }
}

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// Throws Error(code, message) when `condition` is false.
inline void require(bool condition, ErrorCode code, const std::string& message) {
  if (!condition) throw Error(code, message);
}

}  // namespace dmpflight

#endif  // DMPFLIGHT_ERROR_HPP_
