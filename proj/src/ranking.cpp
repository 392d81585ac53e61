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

#include "qdrank/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "qdrank/error.hpp"

namespace qdrank {

std::vector<double> average_ranks(std::span<const double> scores) {
  const std::size_t n = scores.size();
  for (double s : scores) {
    if (std::isnan(s)) throw Error(ErrorCode::kNanScore, "score is NaN");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i + 1;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

RankVector to_ranks(const ScoreList& scores) {
  if (scores.empty()) throw Error(ErrorCode::kEmptyList, "cannot rank an empty score list");
  std::vector<double> values;
  values.reserve(scores.size());
  RankVector out;
  out.ids.reserve(scores.size());
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw Error(ErrorCode::kNanScore, "score for '" + s.id + "' is not finite");
    out.ids.push_back(s.id);
    values.push_back(s.score);
  }
  out.ranks = average_ranks(values);
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::kIdMismatch, "vectors differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw Error(ErrorCode::kDegenerateInput, "need at least two points");
  double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorCode::kDegenerateInput, "constant vector");
  double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

CorrelationResult spearman(const ScoreList& x, const ScoreList& y) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::kIdMismatch, "score lists differ in size (" + std::to_string(x.size()) +
                                            " vs " + std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) throw Error(ErrorCode::kDegenerateInput, "need at least two items");
  std::unordered_map<std::string, std::size_t> pos;
  pos.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!pos.emplace(y[i].id, i).second) throw Error(ErrorCode::kIdMismatch, "duplicate id '" + y[i].id + "'");
  }
  ScoreList y_aligned;
  y_aligned.reserve(x.size());
  for (const auto& s : x) {
    auto it = pos.find(s.id);
    if (it == pos.end()) throw Error(ErrorCode::kIdMismatch, "id '" + s.id + "' missing from second list");
    y_aligned.push_back(y[it->second]);
  }
  auto rx = to_ranks(x);
  auto ry = to_ranks(y_aligned);
  CorrelationResult out;
  out.n = x.size();
  out.rho = pearson(rx.ranks, ry.ranks);
  return out;
}

DrawStats draw_stats(std::span<const double> rhos) {
  if (rhos.empty()) throw Error(ErrorCode::kEmptyList, "no draws");
  const double n = static_cast<double>(rhos.size());
  double mean = std::accumulate(rhos.begin(), rhos.end(), 0.0) / n;
  double ss = 0.0;
  for (double r : rhos) ss += (r - mean) * (r - mean);
  return {mean, std::sqrt(ss / n)};
}

CorrelationResult spearman_over_draws(const std::vector<ScoreList>& draws, const ScoreList& gold) {
  if (draws.empty()) throw Error(ErrorCode::kEmptyList, "no draws");
  std::unordered_map<std::string, double> gold_by_id;
  for (const auto& g : gold) gold_by_id.emplace(g.id, g.score);

  std::vector<double> rhos;
  rhos.reserve(draws.size());
  std::size_t n = 0;
  for (const auto& draw : draws) {
    ScoreList g;
    g.reserve(draw.size());
    for (const auto& s : draw) {
      auto it = gold_by_id.find(s.id);
      if (it == gold_by_id.end()) throw Error(ErrorCode::kMissingGold, "no gold difficulty for '" + s.id + "'");
      g.push_back({s.id, it->second});
    }
    auto r = spearman(draw, g);
    n = r.n;
    rhos.push_back(r.rho);
  }
  auto stats = draw_stats(rhos);
  CorrelationResult out;
  out.n = n;
  out.rho = stats.mean;
  out.mean_rho = stats.mean;
  if (draws.size() > 1) out.std_rho = stats.std;
  return out;
}

std::vector<CurveRow> correlation_curve(const std::map<int, std::vector<ScoreList>>& estimates_by_k,
                                        const ScoreList& gold) {
  std::vector<CurveRow> rows;
  rows.reserve(estimates_by_k.size());
  for (const auto& [k, draws] : estimates_by_k) {
    auto r = spearman_over_draws(draws, gold);
    rows.push_back({k, *r.mean_rho, r.std_rho.value_or(0.0)});
  }
  return rows;
}

}  // namespace qdrank
