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


#include <gtest/gtest.h>

#include <sstream>

#include "qdrank/rasch.hpp"
#include "qdrank/ranking.hpp"
#include "test_support.hpp"

namespace qdrank {
namespace {

const std::vector<double> kUniformSkew = {1.0 / 3, 1.0 / 3, 1.0 / 3};

std::vector<double> normal_difficulties(int n, std::uint64_t seed) {
  Rng g = Rng::derive(seed, "difficulties");
  std::vector<double> b(n);
  for (auto& x : b) x = g.normal(0.0, 1.0);
  return b;
}

ScoreList as_scores(const std::vector<double>& v) {
  ScoreList out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back({"i" + std::to_string(i), v[i]});
  return out;
}

TEST(SimulateCohort, MatchedAbilityGivesHalfCorrect) {
  std::vector<double> b(10, 0.7);
  Rng g = Rng::derive(1, "cohort");
  auto m = simulate_cohort(5000, b, 0.7, 0.0, kUniformSkew, g);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_NEAR(m.proportion_correct(i), 0.5, 0.03);
}

TEST(SimulateCohort, VeryEasyItemsAreAlwaysCorrect) {
  std::vector<double> b(5, -50.0);
  Rng g = Rng::derive(2, "cohort");
  auto m = simulate_cohort(300, b, 0.0, 1.0, kUniformSkew, g);
  for (std::size_t i = 0; i < b.size(); ++i) EXPECT_EQ(m.proportion_correct(i), 1.0);
}

TEST(SimulateCohort, HarderItemsAreAnsweredCorrectlyLessOften) {
  std::vector<double> b;
  for (double x = -3.0; x <= 3.0; x += 0.5) b.push_back(x);
  Rng g = Rng::derive(3, "cohort");
  auto m = simulate_cohort(20000, b, 0.0, 1.0, kUniformSkew, g);
  for (std::size_t i = 1; i < b.size(); ++i) EXPECT_LT(m.proportion_correct(i), m.proportion_correct(i - 1));
}

TEST(SimulateCohort, DistractorCountsFollowSkewAndBadSkewFails) {
  std::vector<double> b = {3.0};
  std::vector<double> skew = {0.7, 0.2, 0.1};
  Rng g = Rng::derive(4, "cohort");
  auto m = simulate_cohort(20000, b, 0.0, 1.0, skew, g);
  const auto& counts = m.choice_counts[0];
  double wrong = double(counts[1] + counts[2] + counts[3]);
  EXPECT_NEAR(counts[1] / wrong, 0.7, 0.02);
  EXPECT_NEAR(counts[3] / wrong, 0.1, 0.02);
  auto dist = m.answer_distribution(0, 2);
  EXPECT_NEAR(dist[2], m.proportion_correct(0), 1e-12);

  std::vector<double> bad = {0.5, 0.6};
  EXPECT_QDRANK_ERROR(simulate_cohort(10, b, 0.0, 1.0, bad, g), ErrorCode::kInvalidSkew);
}

TEST(FitDifficulty, LowerErrorRateMeansEasier) {
  // Item 0 near 90% correct, item 1 near 50% correct, plus filler items.
  std::vector<double> b = {-2.2, 0.0, -1.0, -0.5, 0.5, 1.0};
  Rng g = Rng::derive(5, "cohort");
  auto m = simulate_cohort(3000, b, 0.0, 1.0, kUniformSkew, g);
  EXPECT_NEAR(m.proportion_correct(0), 0.87, 0.04);
  EXPECT_NEAR(m.proportion_correct(1), 0.5, 0.04);
  auto fit = fit_difficulty_lenient(m);
  ASSERT_EQ(fit.kept_items.size(), b.size());
  EXPECT_LT(fit.params.difficulties[0], fit.params.difficulties[1]);
}

TEST(FitDifficulty, RecoversTrueOrdering) {
  auto b = normal_difficulties(100, 6);
  Rng g = Rng::derive(6, "cohort");
  auto m = simulate_cohort(500, b, 0.0, 1.0, kUniformSkew, g);
  auto fit = fit_difficulty_lenient(m);
  ASSERT_EQ(fit.kept_items.size(), 100u);
  EXPECT_GE(spearman(as_scores(fit.params.difficulties), as_scores(b)).rho, 0.95);
  double mean_theta = 0;
  for (double t : fit.params.abilities) mean_theta += t;
  EXPECT_NEAR(mean_theta / fit.params.abilities.size(), 0.0, 1e-9);
}

TEST(FitDifficulty, StrictFitRejectsDegenerateItem) {
  std::vector<double> b = {-50.0, 0.0, 0.5};
  Rng g = Rng::derive(7, "cohort");
  auto m = simulate_cohort(200, b, 0.0, 1.0, kUniformSkew, g);
  EXPECT_QDRANK_ERROR(fit_difficulty(m), ErrorCode::kDegenerateItem);
  auto lenient = fit_difficulty_lenient(m);
  EXPECT_EQ(std::count(lenient.kept_items.begin(), lenient.kept_items.end(), 0u), 0);
}

TEST(FitDifficulty, WriteFitCsv) {
  std::vector<double> b = {-1.0, 0.0, 1.0};
  Rng g = Rng::derive(8, "cohort");
  auto m = simulate_cohort(400, b, 0.0, 1.0, kUniformSkew, g, {"x", "y", "z"});
  auto fit = fit_difficulty_lenient(m);
  std::ostringstream out;
  write_fit_csv(out, m, fit);
  EXPECT_EQ(out.str().substr(0, 12), "item_id,b_ha");
  EXPECT_NE(out.str().find("\nz,"), std::string::npos);
}

TEST(CohortInvariance, DifferentAbilityCohortsAgree) {
  auto b = normal_difficulties(100, 9);
  auto r = cohort_invariance_report(b, {-1.0, 1.0}, {1.0, 1.0}, 1000, 9);
  EXPECT_GE(r.rho_ab, 0.9);
  EXPECT_GT(r.items_compared, 90u);
}

TEST(CohortInvariance, IdenticalCohortsAreIdentical) {
  auto b = normal_difficulties(30, 10);
  auto r = cohort_invariance_report(b, {0.0, 1.0}, {0.0, 1.0}, 300, 10);
  EXPECT_EQ(r.rho_ab, 1.0);
}

TEST(CohortInvariance, TwoItems) {
  std::vector<double> b = {-0.5, 0.5};
  auto r = cohort_invariance_report(b, {-1.0, 1.0}, {1.0, 1.0}, 500, 11);
  EXPECT_EQ(r.items_compared, 2u);
  EXPECT_TRUE(r.rho_ab == 1.0 || r.rho_ab == -1.0);
}

TEST(SyntheticCorpus, CmcqrdShape) {
  Corpus c = make_synthetic_corpus(cmcqrd_like_spec(), 21);
  auto parts = split_by_grade(c);
  std::vector<std::size_t> sizes;
  std::vector<double> means;
  for (const auto& [g, part] : parts) {
    sizes.push_back(part.size());
    double sum = 0;
    for (const auto& q : part.questions()) sum += *q.gold_difficulty;
    means.push_back(sum / part.size());
  }
  EXPECT_EQ(sizes, (std::vector<std::size_t>{140, 327, 137, 54}));
  EXPECT_TRUE(std::is_sorted(means.begin(), means.end()));
  for (std::size_t i = 1; i < means.size(); ++i) EXPECT_LT(means[i - 1], means[i]);
}

TEST(SyntheticCorpus, SpecParsingAndValidation) {
  auto one = parse_synthetic_spec(R"({"grades":[{"grade":"C1","count":1,"mean":0.0,"std":0.5}]})");
  Corpus c = make_synthetic_corpus(one, 1);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_QDRANK_ERROR(parse_synthetic_spec(R"({"grades":[]})"), ErrorCode::kInvalidSpec);
  EXPECT_QDRANK_ERROR(parse_synthetic_spec(R"({"grades":[{"grade":"Z9","count":3}]})"), ErrorCode::kInvalidSpec);
  EXPECT_QDRANK_ERROR(parse_synthetic_spec("not json"), ErrorCode::kInvalidSpec);
}

TEST(SyntheticCorpus, SameSeedSameBytes) {
  std::ostringstream a, b, c;
  write_corpus(a, make_synthetic_corpus(cmcqrd_like_spec(), 5));
  write_corpus(b, make_synthetic_corpus(cmcqrd_like_spec(), 5));
  write_corpus(c, make_synthetic_corpus(cmcqrd_like_spec(), 6));
  EXPECT_EQ(a.str(), b.str());
  EXPECT_NE(a.str(), c.str());
}

}  // namespace
}  // namespace qdrank
