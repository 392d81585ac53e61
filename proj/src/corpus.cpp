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

#include "qdrank/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "qdrank/error.hpp"

namespace qdrank {

namespace {

using json = nlohmann::ordered_json;

constexpr std::array<std::string_view, 7> kGradeOrder = {"B1", "B2", "C1", "C2",
                                                         "easy", "medium", "hard"};

std::size_t grade_rank(std::string_view g) {
  auto it = std::find(kGradeOrder.begin(), kGradeOrder.end(), g);
  return static_cast<std::size_t>(it - kGradeOrder.begin());
}

double sum_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

const json& require(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) throw Error::schema(line, field, "missing");
  return *it;
}

std::string require_string(const json& rec, const char* field, std::size_t line) {
  const auto& v = require(rec, field, line);
  if (!v.is_string()) throw Error::schema(line, field, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const char* field, std::size_t line) {
  if (!v.is_array()) throw Error::schema(line, field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) {
    if (!x.is_number()) throw Error::schema(line, field, "expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

json parse_json_line(std::string_view text, std::size_t line) {
  try {
    json rec = json::parse(text);
    if (!rec.is_object()) throw Error::schema(line, "<record>", "expected a JSON object");
    return rec;
  } catch (const json::parse_error& e) {
    throw Error::schema(line, "<record>", std::string("malformed JSON: ") + e.what());
  }
}

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

std::vector<double> normalize_probabilities(std::vector<double> probs) {
  if (probs.empty()) throw Error(ErrorCode::kInvalidDistribution, "empty probability vector");
  for (double p : probs) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::kInvalidDistribution, "entries must be finite and non-negative");
    }
  }
  double total = sum_of(probs);
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream msg;
    msg << "probabilities sum to " << total << ", expected 1";
    throw Error(ErrorCode::kInvalidDistribution, msg.str());
  }
  // Sums already within rounding distance of 1 are kept as given, so
  // serialise/reload never drifts.
  constexpr double kRoundingSlack = 1e-12;
  if (std::abs(total - 1.0) > kRoundingSlack) {
    for (double& p : probs) p /= total;
  }
  return probs;
}

AnswerDistribution AnswerDistribution::from(std::vector<double> probs) {
  return AnswerDistribution(normalize_probabilities(std::move(probs)));
}

LevelDistribution LevelDistribution::from(double p_easy, double p_medium, double p_hard) {
  auto p = normalize_probabilities({p_easy, p_medium, p_hard});
  return LevelDistribution(p[0], p[1], p[2]);
}

bool is_known_grade(std::string_view grade) { return grade_rank(grade) < kGradeOrder.size(); }

bool GradeLess::operator()(const std::string& a, const std::string& b) const {
  auto ra = grade_rank(a);
  auto rb = grade_rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

Corpus::Corpus(std::string name, std::vector<Question> questions)
    : name_(std::move(name)), questions_(std::move(questions)) {
  if (questions_.empty()) throw Error(ErrorCode::kSchema, "corpus '" + name_ + "' is empty");
  index_.reserve(questions_.size());
  for (std::size_t i = 0; i < questions_.size(); ++i) {
    if (!index_.emplace(questions_[i].id, i).second) {
      throw Error(ErrorCode::kDuplicateId, "duplicate question id '" + questions_[i].id + "'");
    }
  }
}

std::optional<std::size_t> Corpus::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Question& Corpus::at(std::string_view id) const {
  auto idx = index_of(id);
  if (!idx) throw Error(ErrorCode::kUnknownId, "no question with id '" + std::string(id) + "'");
  return questions_[*idx];
}

Question parse_question(std::string_view json_line, std::size_t line) {
  json rec = parse_json_line(json_line, line);
  Question q;
  q.id = require_string(rec, "id", line);
  if (q.id.empty()) throw Error::schema(line, "id", "must be non-empty");
  q.context = require_string(rec, "context", line);
  q.question = require_string(rec, "question", line);

  const auto& options = require(rec, "options", line);
  if (!options.is_array()) throw Error::schema(line, "options", "expected an array of strings");
  for (const auto& o : options) {
    if (!o.is_string()) throw Error::schema(line, "options", "expected an array of strings");
    if (o.get_ref<const std::string&>().empty()) {
      throw Error::schema(line, "options", "option text must be non-empty");
    }
    q.options.push_back(o.get<std::string>());
  }
  if (q.options.size() < 2) throw Error::schema(line, "options", "need at least 2 options");

  const auto& correct = require(rec, "correct_index", line);
  if (!correct.is_number_integer() || correct.get<long long>() < 0) {
    throw Error::schema(line, "correct_index", "expected a non-negative integer");
  }
  q.correct_index = correct.get<std::size_t>();
  if (q.correct_index >= q.options.size()) {
    throw Error::schema(line, "correct_index", "out of range for " +
                                                   std::to_string(q.options.size()) + " options");
  }

  if (auto it = rec.find("grade"); it != rec.end() && !it->is_null()) {
    if (!it->is_string() || !is_known_grade(it->get_ref<const std::string&>())) {
      throw Error::schema(line, "grade", "expected one of B1,B2,C1,C2,easy,medium,hard");
    }
    q.grade = it->get<std::string>();
  }
  if (auto it = rec.find("gold_difficulty"); it != rec.end() && !it->is_null()) {
    if (!it->is_number() || !std::isfinite(it->get<double>())) {
      throw Error::schema(line, "gold_difficulty", "expected a finite number");
    }
    q.gold_difficulty = it->get<double>();
  }
  if (auto it = rec.find("human_dist"); it != rec.end() && !it->is_null()) {
    auto probs = number_array(*it, "human_dist", line);
    if (probs.size() != q.options.size()) {
      throw Error::schema(line, "human_dist", "length differs from number of options");
    }
    try {
      q.human_dist = AnswerDistribution::from(std::move(probs));
    } catch (const Error& e) {
      throw Error::schema(line, "human_dist", e.what());
    }
  }
  return q;
}

std::string serialize_question(const Question& q) {
  json rec;
  rec["id"] = q.id;
  rec["context"] = q.context;
  rec["question"] = q.question;
  rec["options"] = q.options;
  rec["correct_index"] = q.correct_index;
  if (q.grade) rec["grade"] = *q.grade;
  if (q.gold_difficulty) rec["gold_difficulty"] = *q.gold_difficulty;
  if (q.human_dist) {
    rec["human_dist"] = std::vector<double>(q.human_dist->probs().begin(), q.human_dist->probs().end());
  }
  return rec.dump();
}

Corpus read_corpus(std::istream& in, std::string name) {
  std::vector<Question> questions;
  std::set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    Question q = parse_question(text, line);
    if (!seen.insert(q.id).second) {
      throw Error(ErrorCode::kDuplicateId,
                  "line " + std::to_string(line) + ": duplicate question id '" + q.id + "'");
    }
    questions.push_back(std::move(q));
  }
  return Corpus(std::move(name), std::move(questions));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return read_corpus(in, path.stem().string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& q : corpus.questions()) out << serialize_question(q) << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  write_corpus(out, corpus);
}

Corpus attach_probs(const Corpus& corpus, std::istream& in, ProbKind kind) {
  const std::string wanted = kind == ProbKind::kLevel ? "level" : "answer";
  std::vector<Question> questions(corpus.questions().begin(), corpus.questions().end());
  std::vector<bool> assigned(questions.size(), false);

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (is_blank(text)) continue;
    json rec = parse_json_line(text, line);
    std::string id = require_string(rec, "id", line);
    if (auto it = rec.find("kind"); it != rec.end() && !it->is_null()) {
      if (!it->is_string() || (*it != "level" && *it != "answer")) {
        throw Error::schema(line, "kind", "expected \"level\" or \"answer\"");
      }
      if (*it != wanted) continue;
    }
    auto idx = corpus.index_of(id);
    if (!idx) {
      throw Error(ErrorCode::kUnknownId,
                  "line " + std::to_string(line) + ": id '" + id + "' not in corpus");
    }
    if (assigned[*idx]) {
      throw Error(ErrorCode::kDuplicateAssignment,
                  "line " + std::to_string(line) + ": id '" + id + "' already has " + wanted +
                      " probabilities");
    }
    std::vector<double> probs;
    try {
      probs = number_array(require(rec, "probs", line), "probs", line);
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedVector, e.what());
    }
    Question& q = questions[*idx];
    std::size_t expected = kind == ProbKind::kLevel ? 3 : q.options.size();
    auto where = "line " + std::to_string(line) + ": id '" + id + "': ";
    if (probs.size() != expected) {
      throw Error(ErrorCode::kMalformedVector, where + "expected " + std::to_string(expected) +
                                                   " probabilities, got " +
                                                   std::to_string(probs.size()));
    }
    try {
      if (kind == ProbKind::kLevel) {
        q.level_probs = LevelDistribution::from(probs[0], probs[1], probs[2]);
      } else {
        q.answer_probs = AnswerDistribution::from(std::move(probs));
      }
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedVector, where + e.what());
    }
    assigned[*idx] = true;
  }
  return Corpus(corpus.name(), std::move(questions));
}

Corpus attach_probs(const Corpus& corpus, const std::filesystem::path& probs_path, ProbKind kind) {
  std::ifstream in(probs_path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + probs_path.string() + "'");
  return attach_probs(corpus, in, kind);
}

GradeSplit split_by_grade(const Corpus& corpus) {
  std::map<std::string, std::vector<Question>, GradeLess> parts;
  for (const auto& q : corpus.questions()) {
    if (!q.grade) throw Error(ErrorCode::kMissingGrade, "question '" + q.id + "' has no grade");
    parts[*q.grade].push_back(q);
  }
  GradeSplit out;
  for (auto& [grade, qs] : parts) out.emplace(grade, Corpus(corpus.name() + "/" + grade, std::move(qs)));
  return out;
}

ScoreList human_difficulty_signal(const Corpus& corpus) {
  ScoreList out;
  out.reserve(corpus.size());
  for (const auto& q : corpus.questions()) {
    if (!q.human_dist) throw Error(ErrorCode::kNoHumanDist, "question '" + q.id + "' has no human_dist");
    out.push_back({q.id, 1.0 - (*q.human_dist)[q.correct_index]});
  }
  return out;
}

}  // namespace qdrank
