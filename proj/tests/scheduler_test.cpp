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

#include <algorithm>
#include <atomic>
#include <set>
#include <sstream>

#include "qdrank/judge.hpp"
#include "qdrank/ranking.hpp"
#include "qdrank/scheduler.hpp"
#include "test_support.hpp"

namespace qdrank {
namespace {

using testing::latent_corpus;
using testing::make_question;

SimJudgeParams perfect(std::uint64_t seed = 1) {
  SimJudgeParams p;
  p.beta = 1e6;
  p.epsilon = 0.0;
  p.seed = seed;
  return p;
}

TEST(SampleOpponents, ExhaustionAndBounds) {
  Corpus c = latent_corpus(5);
  Rng g = Rng::derive(1, "o");
  auto opp = sample_opponents("q002", c, 4, g);
  std::set<std::string> got(opp.begin(), opp.end());
  EXPECT_EQ(got, (std::set<std::string>{"q000", "q001", "q003", "q004"}));
  EXPECT_QDRANK_ERROR(sample_opponents("q002", c, 5, g), ErrorCode::kKTooLarge);
}

TEST(SampleOpponents, DistinctNeverTargetAndDeterministic) {
  Corpus c = latent_corpus(40);
  for (int t = 0; t < 50; ++t) {
    Rng a = Rng::derive(t, "o"), b = Rng::derive(t, "o");
    auto x = sample_opponents("q007", c, 12, a);
    EXPECT_EQ(x, sample_opponents("q007", c, 12, b));
    std::set<std::string> s(x.begin(), x.end());
    EXPECT_EQ(s.size(), 12u);
    EXPECT_FALSE(s.count("q007"));
  }
}

TEST(SampleOpponents, RoughlyUniform) {
  Corpus c = latent_corpus(11);
  std::map<std::string, int> hits;
  Rng g = Rng::derive(4, "uniform");
  const int trials = 20000;
  for (int t = 0; t < trials; ++t)
    for (const auto& id : sample_opponents("q000", c, 3, g)) ++hits[id];
  // Each of 10 candidates expected 3/10 of the time; 5 sd ~ 0.016.
  for (const auto& [id, n] : hits) EXPECT_NEAR(double(n) / trials, 0.3, 0.02) << id;
}

TEST(TargetPosition, Policies) {
  EXPECT_EQ(target_position(PositionPolicy::kTargetFirst, 1, "a", "b", 0, 3), Position::kFirst);
  EXPECT_EQ(target_position(PositionPolicy::kTargetSecond, 1, "a", "b", 0, 3), Position::kSecond);
  EXPECT_EQ(target_position(PositionPolicy::kBalanced, 1, "a", "b", 0, 0), Position::kFirst);
  EXPECT_EQ(target_position(PositionPolicy::kBalanced, 1, "a", "b", 0, 1), Position::kSecond);
  int first = 0;
  for (int d = 0; d < 2000; ++d) first += target_position(PositionPolicy::kRandom, 5, "a", "b", d, 0) == Position::kFirst;
  EXPECT_NEAR(first / 2000.0, 0.5, 0.05);
  for (auto p : {PositionPolicy::kTargetFirst, PositionPolicy::kTargetSecond, PositionPolicy::kRandom, PositionPolicy::kBalanced})
    EXPECT_EQ(parse_position_policy(to_string(p)), p);
}

TEST(RunComparative, PerfectJudgeRoundRobinGivesRank) {
  Corpus c = latent_corpus(25);
  SimulatedJudge judge(perfect());
  RunConfig cfg{24, 1, 3, PositionPolicy::kRandom};
  auto run = run_comparative(c, judge, cfg);
  ASSERT_EQ(run.draws.size(), 1u);
  std::vector<double> latents;
  for (const auto& q : c.questions()) latents.push_back(*q.gold_difficulty);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double rank0 = double(std::count_if(latents.begin(), latents.end(), [&](double z) { return z < latents[i]; }));
    EXPECT_EQ(run.draws[0][i].score, rank0) << c[i].id;
    EXPECT_EQ(run.draws[0][i].question_id, c[i].id);
  }
  EXPECT_EQ(run.records.size(), 25u * 24u);
}

TEST(RunComparative, CardinalityAndRecordOrder) {
  Corpus c = latent_corpus(12);
  SimJudgeParams p;
  p.seed = 2;
  SimulatedJudge judge(p);
  RunConfig cfg{5, 30, 8, PositionPolicy::kRandom};
  auto run = run_comparative(c, judge, cfg);
  ASSERT_EQ(run.draws.size(), 30u);
  for (int d = 0; d < 30; ++d) {
    ASSERT_EQ(run.draws[d].size(), 12u);
    for (const auto& e : run.draws[d]) EXPECT_EQ(e.draw_index, d);
  }
  EXPECT_EQ(run.records.size(), 12u * 5u * 30u);
  EXPECT_TRUE(std::is_sorted(run.records.begin(), run.records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.draw_index, a.target_id, a.opponent_id, a.target_position) <
           std::tie(b.draw_index, b.target_id, b.opponent_id, b.target_position);
  }));
}

TEST(RunComparative, ScheduledComparisonCountAtPaperScale) {
  // Counting only: no judge calls are made.
  const std::size_t n = 658, k = 250, draws = 30;
  EXPECT_EQ(n * k * draws, 4'935'000u);
  Corpus c = latent_corpus(658);
  EXPECT_NO_THROW({
    Rng g = Rng::derive(0, "o");
    EXPECT_EQ(sample_opponents("q000", c, 250, g).size(), 250u);
  });
}

TEST(RunComparative, IndependentOfParallelism) {
  Corpus c = latent_corpus(30);
  SimJudgeParams p;
  p.seed = 77;
  p.epsilon = 0.1;
  RunConfig cfg{10, 4, 77, PositionPolicy::kRandom};
  SimulatedJudge serial(p, 1), wide(p, 8);
  auto a = run_comparative(c, serial, cfg);
  auto b = run_comparative(c, wide, cfg);
  std::ostringstream ra, rb;
  write_records_csv(ra, a.records);
  write_records_csv(rb, b.records);
  EXPECT_EQ(ra.str(), rb.str());
  for (std::size_t d = 0; d < a.draws.size(); ++d)
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(a.draws[d][i].score, b.draws[d][i].score);
}

// Replies "maybe" to the first `bad` attempts of every call, then defers.
class FlakyJudge final : public Judge {
 public:
  FlakyJudge(const Judge& inner, int bad, int retries) : inner_(inner), bad_(bad), retries_(retries) {}
  std::string absolute(const Question& q, const CallKey& k) const override {
    return k.attempt < bad_ ? "maybe" : inner_.absolute(q, k);
  }
  std::string compare(const Question& a, const Question& b, const CallKey& k) const override {
    return k.attempt < bad_ ? "maybe" : inner_.compare(a, b, k);
  }
  int max_retries() const override { return retries_; }
  int parallelism() const override { return 2; }

 private:
  const Judge& inner_;
  int bad_;
  int retries_;
};

TEST(RunComparative, RetriesUnparsedReplies) {
  Corpus c = latent_corpus(8);
  SimulatedJudge inner(perfect());
  FlakyJudge flaky(inner, 1, 1);
  auto run = run_comparative(c, flaky, RunConfig{7, 1, 1, PositionPolicy::kBalanced});
  for (const auto& r : run.records) EXPECT_NE(r.verdict, Outcome::kUnparsed);

  FlakyJudge hopeless(inner, 5, 1);
  EXPECT_QDRANK_ERROR(run_comparative(c, hopeless, RunConfig{7, 1, 1, PositionPolicy::kBalanced}),
                      ErrorCode::kAllUnparsed);
}

class FailingJudge final : public Judge {
 public:
  std::string absolute(const Question&, const CallKey&) const override { throw Error(ErrorCode::kNetwork, "down"); }
  std::string compare(const Question&, const Question&, const CallKey& k) const override {
    if (k.target_id == "q005") throw Error(ErrorCode::kNetwork, "down");
    return "1";
  }
  int max_retries() const override { return 0; }
  int parallelism() const override { return 1; }
};

TEST(RunComparative, FailureKeepsPartialRecords) {
  Corpus c = latent_corpus(8);
  FailingJudge judge;
  try {
    run_comparative(c, judge, RunConfig{3, 1, 1, PositionPolicy::kTargetFirst});
    FAIL();
  } catch (const JudgeRunError& e) {
    EXPECT_EQ(e.cause(), ErrorCode::kNetwork);
    EXPECT_TRUE(is_judge_error(e.code()));
    EXPECT_FALSE(e.partial_records().empty());
    for (const auto& r : e.partial_records()) EXPECT_NE(r.target_id, "q005");
  }
}

TEST(RunAbsolute, ZeroNoiseIsDrawInvariantAndMonotone) {
  Corpus c = latent_corpus(40);
  SimJudgeParams p;
  p.sigma_abs = 0.0;
  SimulatedJudge judge(p);
  auto run = run_absolute(c, judge, RunConfig{5, 4, 1, PositionPolicy::kRandom});
  for (std::size_t i = 0; i < c.size(); ++i) {
    // Direct affine map + half-up rounding, computed here.
    double z = *c[i].gold_difficulty;
    double expected = std::clamp(std::floor(1.0 + 9.0 * (z + 5.0) / 10.0 + 0.5), 1.0, 10.0);
    for (const auto& d : run.draws) EXPECT_EQ(d[i].score, expected) << c[i].id;
  }
  for (std::size_t i = 0; i < c.size(); ++i)
    for (std::size_t j = 0; j < c.size(); ++j)
      if (*c[i].gold_difficulty < *c[j].gold_difficulty) EXPECT_LE(run.draws[0][i].score, run.draws[0][j].score);
}

TEST(RunAbsolute, SingleSampleIsTheEstimate) {
  Corpus c = latent_corpus(6);
  SimJudgeParams p;
  p.seed = 4;
  SimulatedJudge judge(p);
  auto run = run_absolute(c, judge, RunConfig{1, 1, 4, PositionPolicy::kRandom});
  for (std::size_t i = 0; i < c.size(); ++i) {
    CallKey key{c[i].id, "", 0, 0, Position::kFirst, 0};
    EXPECT_EQ(run.draws[0][i].score, double(parse_absolute(judge.absolute(c[i], key))));
  }
}

TEST(RunAbsolute, AllUnparseable) {
  Corpus c = latent_corpus(3);
  SimulatedJudge inner(perfect());
  FlakyJudge hopeless(inner, 10, 0);
  EXPECT_QDRANK_ERROR(run_absolute(c, hopeless, RunConfig{2, 1, 1, PositionPolicy::kRandom}),
                      ErrorCode::kAllSamplesUnparseable);
}

TEST(PositionBias, PerfectJudge) {
  Corpus c = latent_corpus(30);
  SimulatedJudge judge(perfect());
  Rng g = Rng::derive(1, "pairs");
  auto r = measure_position_bias(c, judge, 500, g);
  EXPECT_EQ(r.inconsistency_rate, 0.0);
  EXPECT_EQ(r.first_pick_rate, 0.5);
  EXPECT_EQ(r.judgments, 1000u);
}

TEST(PositionBias, EpsilonMixture) {
  std::vector<Question> qs;
  for (int i = 0; i < 50; ++i) qs.push_back(make_question("e" + std::to_string(i), 0.0));
  Corpus c("equal", qs);
  SimJudgeParams p;
  p.epsilon = 0.2;
  p.seed = 12;
  SimulatedJudge judge(p);
  Rng g = Rng::derive(12, "pairs");
  auto r = measure_position_bias(c, judge, 5000, g);
  EXPECT_NEAR(r.first_pick_rate, 0.2 + 0.8 * 0.5, 0.02);
  EXPECT_NEAR(r.first_pick_excess, r.first_pick_rate - 0.5, 1e-15);

  p.epsilon = 1.0;
  SimulatedJudge always_first(p);
  auto all = measure_position_bias(c, always_first, 200, g);
  EXPECT_EQ(all.first_pick_rate, 1.0);
  EXPECT_EQ(all.inconsistency_rate, 1.0);
}

TEST(ParallelFor, VisitsEveryIndexOnceAndRethrows) {
  std::vector<std::atomic<int>> seen(1000);
  parallel_for(seen.size(), 8, [&](std::size_t i) { ++seen[i]; });
  for (const auto& s : seen) EXPECT_EQ(s.load(), 1);
  EXPECT_THROW(parallel_for(100, 4, [](std::size_t i) {
                 if (i == 37) throw Error(ErrorCode::kNetwork, "x");
               }),
               Error);
}

TEST(RecordsCsv, Header) {
  std::ostringstream out;
  write_records_csv(out, {});
  EXPECT_EQ(out.str(), std::string(kRecordsHeader) + "\n");
}

}  // namespace
}  // namespace qdrank
