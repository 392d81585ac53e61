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

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qdrank/comparison.hpp"
#include "qdrank/corpus.hpp"
#include "qdrank/error.hpp"
#include "qdrank/estimators.hpp"
#include "qdrank/judge.hpp"
#include "qdrank/rng.hpp"

namespace qdrank {

enum class PositionPolicy { kTargetFirst, kTargetSecond, kRandom, kBalanced };

std::string_view to_string(PositionPolicy p);
std::optional<PositionPolicy> parse_position_policy(std::string_view name);

struct RunConfig {
  int k = 250;     // comparisons (or absolute samples) per question
  int draws = 30;
  std::uint64_t seed = 0;
  PositionPolicy position_policy = PositionPolicy::kRandom;
};

// K distinct ids drawn uniformly without replacement, never the target.
std::vector<std::string> sample_opponents(std::string_view target_id, const Corpus& corpus, int k, Rng& stream);

// Where the target sits in its j-th comparison of a draw.
Position target_position(PositionPolicy policy, std::uint64_t seed, std::string_view target_id,
                         std::string_view opponent_id, int draw, int j);

struct ComparativeRun {
  std::vector<std::vector<DifficultyEstimate>> draws;  // [draw][question], corpus order
  std::vector<ComparisonRecord> records;               // sorted by (draw, target, opponent, position)
};

struct AbsoluteRun {
  std::vector<std::vector<DifficultyEstimate>> draws;
  std::size_t dropped_samples = 0;  // unparseable after retries
};

// Raised when a judge call fails; carries every record completed so far.
class JudgeRunError : public Error {
 public:
  JudgeRunError(const Error& cause, std::vector<ComparisonRecord> partial);
  const std::vector<ComparisonRecord>& partial_records() const { return partial_; }
  ErrorCode cause() const { return cause_; }

 private:
  ErrorCode cause_;
  std::vector<ComparisonRecord> partial_;
};

ComparativeRun run_comparative(const Corpus& corpus, const Judge& judge, const RunConfig& cfg);
AbsoluteRun run_absolute(const Corpus& corpus, const Judge& judge, const RunConfig& cfg);

struct BiasReport {
  std::size_t n_pairs = 0;
  std::size_t judgments = 0;  // parsed judgments, at most 2 * n_pairs
  std::size_t unparsed = 0;
  double first_pick_rate = 0.0;
  double first_pick_excess = 0.0;  // rate - 0.5
  double inconsistency_rate = 0.0;  // pairs where both orders picked the same slot
};

BiasReport measure_position_bias(const Corpus& corpus, const Judge& judge, int n_pairs, Rng& stream);

// target_id,opponent_id,target_position,verdict,draw_index
inline constexpr std::string_view kRecordsHeader = "target_id,opponent_id,target_position,verdict,draw_index";
void write_records_csv(std::ostream& out, const std::vector<ComparisonRecord>& records);
// One JSON object per record, with the raw judge reply.
void write_raw_replies_jsonl(std::ostream& out, const std::vector<ComparisonRecord>& records);

// Runs body(i) for i in [0, n) on up to `parallelism` threads. The first
// exception stops further dispatch and is rethrown after all workers join.
void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& body);

}  // namespace qdrank
