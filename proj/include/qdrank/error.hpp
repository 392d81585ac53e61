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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qdrank {

enum class ErrorCode {
  kIo,
  kSchema,
  kDuplicateId,
  kUnknownId,
  kMalformedVector,
  kDuplicateAssignment,
  kMissingGrade,
  kNoHumanDist,
  kInvalidDistribution,
  kEmptyList,
  kIndexOutOfRange,
  kOutOfRange,
  kMixedTarget,
  kAllUnparsed,
  kIdMismatch,
  kTooManyOptions,
  kUnparseable,
  kAuth,
  kNetwork,
  kMalformedResponse,
  kKTooLarge,
  kJudgeFailure,
  kAllSamplesUnparseable,
  kNanScore,
  kDegenerateInput,
  kMissingGold,
  kInvalidSkew,
  kNonConvergence,
  kDegenerateItem,
  kDegenerateExaminee,
  kInvalidSpec,
  kJudgeConfig,
  kMissingProbs,
  kInvalidArgument,
};

std::string_view to_string(ErrorCode code);

// True for failures that originate at the judge (remote endpoint or its
// configuration) rather than in user-supplied input.
bool is_judge_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  // Schema errors carry the 1-based input line and the offending field.
  static Error schema(std::size_t line, std::string field, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorCode code_;
  std::size_t line_ = 0;
  std::string field_;
};

}  // namespace qdrank
