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

// Dichotomous Rasch model: P(correct | theta, b) = logistic(theta - b).
//
// Fitting is joint maximum likelihood with alternating per-parameter Newton
// steps and a mean-zero ability constraint. JML difficulties carry the usual
// finite-sample bias (stretched by roughly L/(L-1) for L items); callers here
// only consume their ranks.

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qdrank/corpus.hpp"
#include "qdrank/rng.hpp"

namespace qdrank {

struct RaschParams {
  std::vector<double> abilities;     // theta, one per examinee
  std::vector<double> difficulties;  // b, one per item
};

struct ResponseMatrix {
  std::size_t n_examinees = 0;
  std::size_t n_items = 0;
  std::vector<std::uint8_t> correct;  // row-major, examinee x item
  std::vector<std::string> item_ids;
  // choice_counts[item][0] counts correct answers, [1..] each distractor.
  std::vector<std::vector<std::size_t>> choice_counts;

  bool at(std::size_t examinee, std::size_t item) const { return correct[examinee * n_items + item] != 0; }
  double proportion_correct(std::size_t item) const;
  // Empirical option frequencies with the correct option placed at
  // `correct_index` and distractors filling the other slots in order.
  AnswerDistribution answer_distribution(std::size_t item, std::size_t correct_index) const;
};

// `distractor_skew` is a distribution over the wrong options (its length sets
// the option count minus one). Item ids default to "item0", "item1", ...
ResponseMatrix simulate_cohort(int n_examinees, std::span<const double> difficulties, double theta_mean,
                               double theta_std, std::span<const double> distractor_skew, Rng& stream,
                               std::vector<std::string> item_ids = {});

struct RaschFit {
  RaschParams params;
  std::vector<std::size_t> kept_items;      // indices into the input matrix
  std::vector<std::size_t> kept_examinees;
  int iterations = 0;
};

// Strict: any all-correct/all-wrong item or examinee is an error.
RaschParams fit_difficulty(const ResponseMatrix& m, double tol = 1e-6, int max_iter = 500);

// Drops degenerate items and examinees (repeatedly, since dropping one can
// make another degenerate) and fits what remains.
RaschFit fit_difficulty_lenient(const ResponseMatrix& m, double tol = 1e-6, int max_iter = 500);

struct CohortSpec {
  double mean = 0.0;
  double std = 1.0;
};

struct CohortInvarianceReport {
  double rho_ab = 0.0;
  std::size_t items_compared = 0;
  std::size_t dropped_items_a = 0;
  std::size_t dropped_items_b = 0;
  std::vector<std::optional<double>> fitted_a;  // per input item; empty if dropped
  std::vector<std::optional<double>> fitted_b;
};

// Each cohort's random stream is keyed by (seed, cohort mean, cohort std), so
// identical cohort specs give identical simulated responses.
CohortInvarianceReport cohort_invariance_report(std::span<const double> difficulties, CohortSpec cohort_a,
                                                CohortSpec cohort_b, int n_each, std::uint64_t seed);

struct GradeSpec {
  std::string grade;
  int count = 0;
  int with_dist = -1;  // questions carrying human_dist; -1 means all
  double mean = 0.0;   // gold difficulty mean
  double std = 1.0;
  std::optional<double> cohort_mean;  // defaults to `mean`
};

struct SyntheticSpec {
  std::vector<GradeSpec> grades;
  int examinees_per_grade = 500;
  double theta_std = 1.0;
  std::vector<double> distractor_skew = {1.0 / 3, 1.0 / 3, 1.0 / 3};
};

// Four grades shaped like the CMCQRD reading set: 140/327/137/54 questions,
// 115/222/72/39 with human distributions, rising mean difficulty.
SyntheticSpec cmcqrd_like_spec();

// JSON: {"grades":[{"grade":"B1","count":140,"with_dist":115,"mean":-1.5,
// "std":0.5}], "examinees_per_grade":500, "theta_std":1.0,
// "distractor_skew":[...]}
SyntheticSpec parse_synthetic_spec(std::string_view json_text);
void validate(const SyntheticSpec& spec);

Corpus make_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed, std::string name = "synthetic");

// item_id,b_hat
void write_fit_csv(std::ostream& out, const ResponseMatrix& m, const RaschFit& fit);

}  // namespace qdrank
