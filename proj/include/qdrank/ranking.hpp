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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdrank/scores.hpp"

namespace qdrank {

// 1-based ranks, higher score -> higher rank, ties share the mean of the
// ranks they span. Ids keep the input order.
struct RankVector {
  std::vector<std::string> ids;
  std::vector<double> ranks;
};

struct CorrelationResult {
  double rho = 0.0;
  std::size_t n = 0;
  std::optional<double> mean_rho;
  std::optional<double> std_rho;  // only when computed over more than one draw
};

struct DrawStats {
  double mean = 0.0;
  double std = 0.0;  // population
};

struct CurveRow {
  int k = 0;
  double mean_rho = 0.0;
  double std_rho = 0.0;
};

std::vector<double> average_ranks(std::span<const double> scores);
RankVector to_ranks(const ScoreList& scores);

// Pearson correlation of two equal-length value vectors; throws
// degenerate-input if either is constant.
double pearson(std::span<const double> x, std::span<const double> y);

// Spearman's rho as Pearson on average-tie ranks. Pairs are matched by id.
CorrelationResult spearman(const ScoreList& x, const ScoreList& y);

DrawStats draw_stats(std::span<const double> rhos);

// Spearman of every draw against `gold`, reduced to mean/std.
CorrelationResult spearman_over_draws(const std::vector<ScoreList>& draws, const ScoreList& gold);

// Gold must cover every id that appears in any draw.
std::vector<CurveRow> correlation_curve(const std::map<int, std::vector<ScoreList>>& estimates_by_k,
                                        const ScoreList& gold);

}  // namespace qdrank
