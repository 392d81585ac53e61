// Copyright 2026 The QDRank Authors.
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

#include "qdrank/error.hpp"

namespace qdrank {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kSchema: return "schema-error";
    case ErrorCode::kDuplicateId: return "duplicate-id";
    case ErrorCode::kUnknownId: return "unknown-id";
    case ErrorCode::kMalformedVector: return "malformed-vector";
    case ErrorCode::kDuplicateAssignment: return "duplicate-assignment";
    case ErrorCode::kMissingGrade: return "missing-grade";
    case ErrorCode::kNoHumanDist: return "no-human-dist";
    case ErrorCode::kInvalidDistribution: return "invalid-distribution";
    case ErrorCode::kEmptyList: return "empty-list";
    case ErrorCode::kIndexOutOfRange: return "index-out-of-range";
    case ErrorCode::kOutOfRange: return "out-of-range";
    case ErrorCode::kMixedTarget: return "mixed-target";
    case ErrorCode::kAllUnparsed: return "all-unparsed";
    case ErrorCode::kIdMismatch: return "id-mismatch";
    case ErrorCode::kTooManyOptions: return "too-many-options";
    case ErrorCode::kUnparseable: return "unparseable";
    case ErrorCode::kAuth: return "auth-error";
    case ErrorCode::kNetwork: return "network-error";
    case ErrorCode::kMalformedResponse: return "malformed-response";
    case ErrorCode::kKTooLarge: return "K-too-large";
    case ErrorCode::kJudgeFailure: return "judge-failure";
    case ErrorCode::kAllSamplesUnparseable: return "all-samples-unparseable";
    case ErrorCode::kNanScore: return "nan-score";
    case ErrorCode::kDegenerateInput: return "degenerate-input";
    case ErrorCode::kMissingGold: return "missing-gold";
    case ErrorCode::kInvalidSkew: return "invalid-skew";
    case ErrorCode::kNonConvergence: return "non-convergence";
    case ErrorCode::kDegenerateItem: return "degenerate-item";
    case ErrorCode::kDegenerateExaminee: return "degenerate-examinee";
    case ErrorCode::kInvalidSpec: return "invalid-spec";
    case ErrorCode::kJudgeConfig: return "judge-config-error";
    case ErrorCode::kMissingProbs: return "missing-probs";
    case ErrorCode::kInvalidArgument: return "invalid-argument";
  }
  return "unknown-error";
}

bool is_judge_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kAuth:
    case ErrorCode::kNetwork:
    case ErrorCode::kMalformedResponse:
    case ErrorCode::kJudgeFailure:
    case ErrorCode::kJudgeConfig:
    case ErrorCode::kAllUnparsed:
    case ErrorCode::kAllSamplesUnparseable:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

Error Error::schema(std::size_t line, std::string field, const std::string& message) {
  Error e(ErrorCode::kSchema,
          "line " + std::to_string(line) + ", field '" + field + "': " + message);
  e.line_ = line;
  e.field_ = std::move(field);
  return e;
}

}  // namespace qdrank
