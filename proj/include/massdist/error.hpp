// Copyright 2026 The massdist Authors
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

#ifndef MASSDIST_ERROR_HPP_
#define MASSDIST_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace massdist {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidShape,
  kCatalogUnknown,
  kInconsistentGrouping,
  kSingularInertia,
  kDivergence,
  kEmptyActionSet,
  kInsufficientData,
  kInsufficientExcitation,
  kNonPhysicalInertia,
  kDegenerateGeometry,
  kInconsistentSamples,
  kRankDeficient,
  kUnidentifiableMass,
  kIncompatibleTrajectories,
  kEvaluation,
  kIo,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kInvalidShape: return "invalid-shape";
    case ErrorCode::kCatalogUnknown: return "catalog-unknown";
    case ErrorCode::kInconsistentGrouping: return "inconsistent-grouping";
    case ErrorCode::kSingularInertia: return "singular-inertia";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kEmptyActionSet: return "empty-action-set";
    case ErrorCode::kInsufficientData: return "insufficient-data";
    case ErrorCode::kInsufficientExcitation: return "insufficient-excitation";
    case ErrorCode::kNonPhysicalInertia: return "non-physical-inertia";
    case ErrorCode::kDegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::kInconsistentSamples: return "inconsistent-samples";
    case ErrorCode::kRankDeficient: return "rank-deficient";
    case ErrorCode::kUnidentifiableMass: return "unidentifiable-mass";
    case ErrorCode::kIncompatibleTrajectories:
      return "incompatible-trajectories";
    case ErrorCode::kEvaluation: return "evaluation";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

// Library-wide exception. `detail` carries a small payload for callers that
// need it (achieved rank, failing step index, null-space dimension).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, long detail = -1)
      : std::runtime_error(std::string(error_code_name(code)) + ": " +
                           message),
        code_(code),
        message_(message),
        detail_(detail) {}

  ErrorCode code() const { return code_; }
  const std::string& message() const { return message_; }
  long detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string message_;
  long detail_;
};

}  // namespace massdist

#endif  // MASSDIST_ERROR_HPP_
