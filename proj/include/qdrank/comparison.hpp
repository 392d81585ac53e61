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

#include <string>
#include <string_view>

namespace qdrank {

enum class Position { kFirst, kSecond };

// What a judge said about a rendered pair.
enum class VerdictValue { kFirst, kSecond, kUnparsed };

struct Verdict {
  VerdictValue value = VerdictValue::kUnparsed;
  std::string raw;
};

// What the judge's answer means for the target question.
enum class Outcome { kTargetWin, kTargetLoss, kUnparsed };

// Win iff the judge picked the slot the target occupied.
constexpr Outcome resolve_outcome(Position target_position, VerdictValue said) {
  if (said == VerdictValue::kUnparsed) return Outcome::kUnparsed;
  bool picked_first = said == VerdictValue::kFirst;
  bool target_first = target_position == Position::kFirst;
  return picked_first == target_first ? Outcome::kTargetWin : Outcome::kTargetLoss;
}

struct ComparisonRecord {
  std::string target_id;
  std::string opponent_id;
  Position target_position = Position::kFirst;
  Outcome verdict = Outcome::kUnparsed;
  int draw_index = 0;
  std::string raw;
};

std::string_view to_string(Position p);
std::string_view to_string(Outcome o);
std::string_view to_string(VerdictValue v);

}  // namespace qdrank
