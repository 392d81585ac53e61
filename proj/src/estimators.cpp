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

#include "qdrank/estimators.hpp"

#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "qdrank/csv.hpp"
#include "qdrank/error.hpp"
#include "qdrank/ranking.hpp"

namespace qdrank {

std::string_view to_string(Position p) { return p == Position::kFirst ? "first" : "second"; }

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::kTargetWin: return "target-win";
    case Outcome::kTargetLoss: return "target-loss";
    case Outcome::kUnparsed: return "unparsed";
  }
  return "unparsed";
}

std::string_view to_string(VerdictValue v) {
  switch (v) {
    case VerdictValue::kFirst: return "first";
    case VerdictValue::kSecond: return "second";
    case VerdictValue::kUnparsed: return "unparsed";
  }
  return "unparsed";
}

std::string_view to_string(Method m) {
  switch (m) {
    case Method::kLevel: return "level";
    case Method::kRc: return "rc";
    case Method::kAbsolute: return "absolute";
    case Method::kComparative: return "comparative";
    case Method::kCombined: return "combined";
    case Method::kHuman: return "human";
  }
  return "level";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::kLevel, Method::kRc, Method::kAbsolute, Method::kComparative,
                   Method::kCombined, Method::kHuman}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

double level_map(const LevelDistribution& dist) {
  return 0.0 * dist.p_easy() + 0.5 * dist.p_medium() + 1.0 * dist.p_hard();
}

LevelDistribution ensemble_mean(std::span<const LevelDistribution> dists) {
  if (dists.empty()) throw Error(ErrorCode::kEmptyList, "ensemble has no members");
  double e = 0.0, m = 0.0, h = 0.0;
  for (const auto& d : dists) {
    e += d.p_easy();
    m += d.p_medium();
    h += d.p_hard();
  }
  const double n = static_cast<double>(dists.size());
  return LevelDistribution::from(e / n, m / n, h / n);
}

double rc_complement(const AnswerDistribution& dist, std::size_t correct_index) {
  if (correct_index >= dist.size()) {
    throw Error(ErrorCode::kIndexOutOfRange, "correct index " + std::to_string(correct_index) +
                                                 " for " + std::to_string(dist.size()) + " options");
  }
  return 1.0 - dist[correct_index];
}

double absolute_aggregate(std::span<const double> samples) {
  if (samples.empty()) throw Error(ErrorCode::kEmptyList, "no absolute samples");
  for (double s : samples) {
    if (!(s >= 1.0 && s <= 10.0)) {
      throw Error(ErrorCode::kOutOfRange, "absolute sample " + csv::format_double(s) + " outside [1, 10]");
    }
  }
  return std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(samples.size());
}

double win_count(std::span<const ComparisonRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyList, "no comparison records");
  const std::string& target = records.front().target_id;
  std::size_t wins = 0, unparsed = 0;
  for (const auto& r : records) {
    if (r.target_id != target) {
      throw Error(ErrorCode::kMixedTarget, "records mix targets '" + target + "' and '" + r.target_id + "'");
    }
    if (r.verdict == Outcome::kTargetWin) ++wins;
    if (r.verdict == Outcome::kUnparsed) ++unparsed;
  }
  const std::size_t k = records.size();
  if (unparsed == k) throw Error(ErrorCode::kAllUnparsed, "every comparison for '" + target + "' is unparsed");
  if (unparsed == 0) return static_cast<double>(wins);
  return static_cast<double>(wins) * static_cast<double>(k) / static_cast<double>(k - unparsed);
}

std::vector<DifficultyEstimate> combine(const std::vector<DifficultyEstimate>& a,
                                        const std::vector<DifficultyEstimate>& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::kIdMismatch, "estimate lists differ in size");
  std::unordered_map<std::string, std::size_t> pos_b;
  for (std::size_t i = 0; i < b.size(); ++i) pos_b.emplace(b[i].question_id, i);

  ScoreList sa = to_score_list(a);
  ScoreList sb;
  sb.reserve(b.size());
  for (const auto& e : a) {
    auto it = pos_b.find(e.question_id);
    if (it == pos_b.end()) throw Error(ErrorCode::kIdMismatch, "id '" + e.question_id + "' missing from second list");
    sb.push_back({e.question_id, b[it->second].score});
  }
  auto ra = to_ranks(sa);
  auto rb = to_ranks(sb);
  std::vector<DifficultyEstimate> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back({a[i].question_id, Method::kCombined, 0.5 * (ra.ranks[i] + rb.ranks[i]), a[i].draw_index});
  }
  return out;
}

ScoreList to_score_list(const std::vector<DifficultyEstimate>& estimates) {
  ScoreList out;
  out.reserve(estimates.size());
  for (const auto& e : estimates) out.push_back({e.question_id, e.score});
  return out;
}

std::map<int, std::vector<DifficultyEstimate>> by_draw(const std::vector<DifficultyEstimate>& estimates) {
  std::map<int, std::vector<DifficultyEstimate>> out;
  for (const auto& e : estimates) out[e.draw_index.value_or(-1)].push_back(e);
  return out;
}

void write_estimates_csv(std::ostream& out, const std::vector<DifficultyEstimate>& estimates) {
  out << kEstimatesHeader << '\n';
  for (const auto& e : estimates) {
    out << csv::join_row({e.question_id, std::string(to_string(e.method)),
                          e.draw_index ? std::to_string(*e.draw_index) : std::string(),
                          csv::format_double(e.score)})
        << '\n';
  }
}

std::vector<DifficultyEstimate> read_estimates_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::kSchema, "empty estimates file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kEstimatesHeader) {
    throw Error::schema(1, "<header>", "expected '" + std::string(kEstimatesHeader) + "'");
  }
  std::vector<DifficultyEstimate> out;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    auto f = csv::split_row(line);
    if (f.size() != 4) throw Error::schema(n, "<row>", "expected 4 columns");
    DifficultyEstimate e;
    e.question_id = f[0];
    auto m = parse_method(f[1]);
    if (!m) throw Error::schema(n, "method", "unknown method '" + f[1] + "'");
    e.method = *m;
    if (!f[2].empty()) {
      try {
        e.draw_index = std::stoi(f[2]);
      } catch (const std::exception&) {
        throw Error::schema(n, "draw_index", "not an integer");
      }
    }
    try {
      e.score = csv::parse_double(f[3]);
    } catch (const Error&) {
      throw Error::schema(n, "score", "not a finite number");
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace qdrank
