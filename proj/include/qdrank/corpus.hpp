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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qdrank/scores.hpp"

namespace qdrank {

// Sum-to-one tolerance applied before exact renormalisation.
inline constexpr double kProbabilityTolerance = 1e-6;

// Probability over the options of one question, in option order.
class AnswerDistribution {
 public:
  // Validates (non-negative, sums to 1 within tolerance) then renormalises.
  static AnswerDistribution from(std::vector<double> probs);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  explicit AnswerDistribution(std::vector<double> p) : probs_(std::move(p)) {}
  std::vector<double> probs_;
};

// Output of a three-way level classifier.
class LevelDistribution {
 public:
  static LevelDistribution from(double p_easy, double p_medium, double p_hard);

  double p_easy() const { return p_easy_; }
  double p_medium() const { return p_medium_; }
  double p_hard() const { return p_hard_; }

 private:
  LevelDistribution(double e, double m, double h) : p_easy_(e), p_medium_(m), p_hard_(h) {}
  double p_easy_;
  double p_medium_;
  double p_hard_;
};

// Validation helper shared by both distribution types. Throws
// invalid-distribution on negative/non-finite entries or a bad sum.
std::vector<double> normalize_probabilities(std::vector<double> probs);

struct Question {
  std::string id;
  std::string context;
  std::string question;
  std::vector<std::string> options;
  std::size_t correct_index = 0;
  std::optional<std::string> grade;
  std::optional<double> gold_difficulty;
  std::optional<AnswerDistribution> human_dist;

  // System outputs attached after load.
  std::optional<LevelDistribution> level_probs;
  std::optional<AnswerDistribution> answer_probs;

  const std::string& correct_option() const { return options.at(correct_index); }
};

// Grade labels accepted in the `grade` field.
bool is_known_grade(std::string_view grade);

class Corpus {
 public:
  Corpus(std::string name, std::vector<Question> questions);

  const std::string& name() const { return name_; }
  std::span<const Question> questions() const { return questions_; }
  std::size_t size() const { return questions_.size(); }
  const Question& operator[](std::size_t i) const { return questions_[i]; }

  std::optional<std::size_t> index_of(std::string_view id) const;
  const Question& at(std::string_view id) const;

 private:
  std::string name_;
  std::vector<Question> questions_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class ProbKind { kLevel, kAnswer };

// Parses one JSONL record. `line` is used for error reporting only.
Question parse_question(std::string_view json_line, std::size_t line);
std::string serialize_question(const Question& q);

Corpus load_corpus(const std::filesystem::path& path);
Corpus read_corpus(std::istream& in, std::string name);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

Corpus attach_probs(const Corpus& corpus, const std::filesystem::path& probs_path, ProbKind kind);
Corpus attach_probs(const Corpus& corpus, std::istream& in, ProbKind kind);

// Parts keep input order; map key order is B1<B2<C1<C2, then easy<medium<hard.
struct GradeLess {
  bool operator()(const std::string& a, const std::string& b) const;
};
using GradeSplit = std::map<std::string, Corpus, GradeLess>;
GradeSplit split_by_grade(const Corpus& corpus);

// Larger = harder: 1 - human_dist[correct_index].
ScoreList human_difficulty_signal(const Corpus& corpus);

}  // namespace qdrank
