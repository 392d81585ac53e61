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

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qdrank/comparison.hpp"
#include "qdrank/corpus.hpp"
#include "qdrank/scores.hpp"

namespace qdrank {

enum class Method { kLevel, kRc, kAbsolute, kComparative, kCombined, kHuman };

std::string_view to_string(Method m);
std::optional<Method> parse_method(std::string_view name);

struct DifficultyEstimate {
  std::string question_id;
  Method method = Method::kLevel;
  double score = 0.0;
  std::optional<int> draw_index;
};

// 0 * p_easy + 0.5 * p_medium + 1 * p_hard.
double level_map(const LevelDistribution& dist);

// Probability averaging across ensemble members.
LevelDistribution ensemble_mean(std::span<const LevelDistribution> dists);

// 1 - p(correct option).
double rc_complement(const AnswerDistribution& dist, std::size_t correct_index);

// Mean of K judge samples, each on the 1..10 scale.
double absolute_aggregate(std::span<const double> samples);

// Number of target wins. Unparsed records are left out of the denominator and
// the count is rescaled to the nominal K: wins * K / (K - unparsed).
double win_count(std::span<const ComparisonRecord> records);

// Per id, the mean of the two average-tie ranks. Output follows the order of
// `a`; the draw index of `a` is carried over.
std::vector<DifficultyEstimate> combine(const std::vector<DifficultyEstimate>& a,
                                        const std::vector<DifficultyEstimate>& b);

ScoreList to_score_list(const std::vector<DifficultyEstimate>& estimates);

// Groups estimates by draw index (a missing index is its own single draw).
std::map<int, std::vector<DifficultyEstimate>> by_draw(const std::vector<DifficultyEstimate>& estimates);

// CSV: question_id,method,draw_index,score
inline constexpr std::string_view kEstimatesHeader = "question_id,method,draw_index,score";
void write_estimates_csv(std::ostream& out, const std::vector<DifficultyEstimate>& estimates);
std::vector<DifficultyEstimate> read_estimates_csv(std::istream& in);

}  // namespace qdrank
