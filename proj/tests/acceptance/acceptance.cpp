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


// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: qdrank_acceptance <path-to-qdrank-binary> <fixture-dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "qdrank/corpus.hpp"
#include "qdrank/estimators.hpp"
#include "qdrank/judge.hpp"
#include "qdrank/ranking.hpp"
#include "qdrank/rasch.hpp"
#include "qdrank/rng.hpp"
#include "qdrank/scheduler.hpp"

namespace {

using namespace qdrank;
namespace fs = std::filesystem;

struct Check {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

int workers() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ScoreList gold_of(const Corpus& c) {
  ScoreList out;
  for (const auto& q : c.questions()) out.push_back({q.id, *q.gold_difficulty});
  return out;
}

// N questions with gold ~ Normal(0, 1).
Corpus normal_corpus(int n, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.grades = {GradeSpec{"B2", n, 0, 0.0, 1.0, std::nullopt}};
  spec.examinees_per_grade = 1;
  return make_synthetic_corpus(spec, seed);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

// ---------------------------------------------------------------- criteria

Check spearman_oracle() {
  auto t0 = std::chrono::steady_clock::now();
  Rng g = Rng::derive(2024, "acceptance/spearman");
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    std::size_t n = 2 + g.below(199);
    // Tie-free by construction: random permutations of 1..n.
    std::vector<double> x(n), y(n);
    std::iota(x.begin(), x.end(), 1.0);
    std::iota(y.begin(), y.end(), 1.0);
    std::shuffle(x.begin(), x.end(), g);
    std::shuffle(y.begin(), y.end(), g);
    ScoreList sx, sy;
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sx.push_back({std::to_string(i), x[i]});
      sy.push_back({std::to_string(i), y[i]});
      d2 += (x[i] - y[i]) * (x[i] - y[i]);
    }
    double nn = double(n);
    double closed = 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0));
    worst = std::max(worst, std::abs(spearman(sx, sy).rho - closed));
  }
  ScoreList a = {{"a", 1}, {"b", 2}, {"c", 3}, {"d", 4}};
  ScoreList b = {{"a", 1}, {"b", 3}, {"c", 2}, {"d", 4}};
  double worked = spearman(a, b).rho;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst <= 1e-12 && worked == 0.8 && secs < 5.0,
          fmt("max |diff| %.2e over 1000 vectors, worked example %.17g, %.2fs", worst, worked, secs)};
}

Check level_map_exact() {
  double a = level_map(LevelDistribution::from(1, 0, 0));
  double b = level_map(LevelDistribution::from(0, 0, 1));
  double c = level_map(LevelDistribution::from(0, 1, 0));
  double d = level_map(LevelDistribution::from(0.2, 0.5, 0.3));
  return {a == 0.0 && b == 1.0 && c == 0.5 && d == 0.55, fmt("%.17g %.17g %.17g %.17g", a, b, c, d)};
}

Check perfect_recovery() {
  auto t0 = std::chrono::steady_clock::now();
  std::vector<Question> qs;
  for (int i = 0; i < 60; ++i) {
    Question q;
    q.id = fmt("p%02d", i);
    q.context = "c";
    q.question = "q";
    q.options = {"a", "b", "c", "d"};
    q.gold_difficulty = std::sin(1.0 + i * 0.37) * 3.0 + i * 1e-3;  // distinct, unordered
    qs.push_back(q);
  }
  Corpus corpus("perfect", qs);
  SimulatedJudge judge({1e6, 0.0, 1.0, -5.0, 5.0, 7}, workers());
  auto run = run_comparative(corpus, judge, RunConfig{59, 1, 7, PositionPolicy::kRandom});
  double rho = spearman(to_score_list(run.draws[0]), gold_of(corpus)).rho;
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {rho == 1.0 && secs < 10.0, fmt("rho %.17g, %.2fs", rho, secs)};
}

Check k_curve_property() {
  auto t0 = std::chrono::steady_clock::now();
  const int n_seeds = 20;
  // K=200 needs at least 201 questions.
  const int n = 201;
  const std::vector<int> ks = {10, 50, 200};
  std::map<int, std::vector<double>> means, stds;
  for (int s = 0; s < n_seeds; ++s) {
    std::uint64_t seed = 1000 + s;
    Corpus corpus = normal_corpus(n, seed);
    SimulatedJudge judge({1.5, 0.1, 1.0, -5.0, 5.0, seed}, workers());
    std::map<int, std::vector<ScoreList>> by_k;
    for (int k : ks) {
      auto run = run_comparative(corpus, judge, RunConfig{k, 30, seed, PositionPolicy::kRandom});
      for (const auto& d : run.draws) by_k[k].push_back(to_score_list(d));
    }
    for (const auto& row : correlation_curve(by_k, gold_of(corpus))) {
      means[row.k].push_back(row.mean_rho);
      stds[row.k].push_back(row.std_rho);
    }
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  double m10 = mean_of(means[10]), m50 = mean_of(means[50]), m200 = mean_of(means[200]);
  double s10 = mean_of(stds[10]), s50 = mean_of(stds[50]), s200 = mean_of(stds[200]);
  return {s200 < s10 && m200 >= m10 && secs < 300.0,
          fmt("N=%d, %d seeds; mean_rho %.4f/%.4f/%.4f, std_rho %.4f/%.4f/%.4f at K=10/50/200, %.1fs", n, n_seeds,
              m10, m50, m200, s10, s50, s200, secs)};
}

Check comparative_beats_absolute() {
  auto t0 = std::chrono::steady_clock::now();
  const int n_seeds = 20;
  int wins = 0;
  std::vector<double> comp, abs;
  for (int s = 0; s < n_seeds; ++s) {
    std::uint64_t seed = 2000 + s;
    Corpus corpus = normal_corpus(200, seed);
    SimulatedJudge judge({1.5, 0.0, 2.0, -5.0, 5.0, seed}, workers());
    RunConfig cfg{100, 30, seed, PositionPolicy::kRandom};
    auto gold = gold_of(corpus);
    std::vector<ScoreList> cd, ad;
    for (const auto& d : run_comparative(corpus, judge, cfg).draws) cd.push_back(to_score_list(d));
    for (const auto& d : run_absolute(corpus, judge, cfg).draws) ad.push_back(to_score_list(d));
    double c = *spearman_over_draws(cd, gold).mean_rho;
    double a = *spearman_over_draws(ad, gold).mean_rho;
    comp.push_back(c);
    abs.push_back(a);
    wins += c > a;
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {wins >= (8 * n_seeds + 9) / 10,
          fmt("comparative ahead in %d/%d seeds; mean rho comparative %.4f vs absolute %.4f, %.1fs", wins, n_seeds,
              mean_of(comp), mean_of(abs), secs)};
}

Check combination_gain() {
  const int n_seeds = 50;
  const int n = 200;
  const double noise = 1.8;
  int gains = 0, in_range = 0;
  double lo = 1.0, hi = -1.0;
  for (int s = 0; s < n_seeds; ++s) {
    Rng g = Rng::derive(3000 + s, "acceptance/combination");
    std::vector<DifficultyEstimate> a, b;
    ScoreList gold;
    for (int i = 0; i < n; ++i) {
      std::string id = fmt("c%03d", i);
      double z = g.normal(0.0, 1.0);
      gold.push_back({id, z});
      a.push_back({id, Method::kLevel, z + g.normal(0.0, noise), std::nullopt});
      b.push_back({id, Method::kComparative, z + g.normal(0.0, noise), std::nullopt});
    }
    double ra = spearman(to_score_list(a), gold).rho;
    double rb = spearman(to_score_list(b), gold).rho;
    double rc = spearman(to_score_list(combine(a, b)), gold).rho;
    lo = std::min({lo, ra, rb});
    hi = std::max({hi, ra, rb});
    bool ok = ra >= 0.3 && ra <= 0.6 && rb >= 0.3 && rb <= 0.6;
    in_range += ok;
    gains += ok && rc >= std::max(ra, rb);
  }
  return {gains * 10 >= 8 * n_seeds,
          fmt("combined >= best single in %d/%d seeds; individual rho in [%.3f, %.3f], %d/%d seeds inside [0.3, 0.6]",
              gains, n_seeds, lo, hi, in_range, n_seeds)};
}

Check bias_calibration() {
  std::vector<Question> equal, distinct;
  for (int i = 0; i < 100; ++i) {
    Question q;
    q.id = fmt("b%03d", i);
    q.context = "c";
    q.question = "q";
    q.options = {"a", "b"};
    q.gold_difficulty = 0.0;
    equal.push_back(q);
    q.gold_difficulty = i * 0.05;
    distinct.push_back(q);
  }
  Rng pairs = Rng::derive(4000, "acceptance/bias");
  SimulatedJudge biased({1.5, 0.2, 1.0, -5.0, 5.0, 4000}, workers());
  auto r = measure_position_bias(Corpus("equal", equal), biased, 5000, pairs);
  SimulatedJudge perfect({1e6, 0.0, 1.0, -5.0, 5.0, 4001}, workers());
  auto p = measure_position_bias(Corpus("distinct", distinct), perfect, 5000, pairs);
  bool ok = std::abs(r.first_pick_rate - 0.6) <= 0.02 && p.inconsistency_rate == 0.0;
  return {ok, fmt("first-pick rate %.4f (eps 0.2), perfect-judge inconsistency %.4f", r.first_pick_rate,
                  p.inconsistency_rate)};
}

Check rasch_recovery() {
  auto t0 = std::chrono::steady_clock::now();
  Rng g = Rng::derive(5000, "acceptance/rasch/items");
  std::vector<double> b(100);
  for (auto& x : b) x = g.normal(0.0, 1.0);
  std::vector<double> skew = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  Rng cohort = Rng::derive(5000, "acceptance/rasch/cohort");
  auto m = simulate_cohort(500, b, 0.0, 1.0, skew, cohort);
  auto fit = fit_difficulty_lenient(m);
  ScoreList fitted, truth;
  for (std::size_t j = 0; j < fit.kept_items.size(); ++j) {
    std::size_t item = fit.kept_items[j];
    fitted.push_back({std::to_string(item), fit.params.difficulties[j]});
    truth.push_back({std::to_string(item), b[item]});
  }
  double recovery = spearman(fitted, truth).rho;
  auto inv = cohort_invariance_report(b, {-1.0, 1.0}, {1.0, 1.0}, 1000, 5000);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {recovery >= 0.95 && inv.rho_ab >= 0.9 && secs < 120.0,
          fmt("recovery rho %.4f on %zu items, cross-cohort rho %.4f on %zu items, %.1fs", recovery,
              fit.kept_items.size(), inv.rho_ab, inv.items_compared, secs)};
}

Check grade_pattern() {
  const int n_seeds = 10;
  int ok_seeds = 0;
  std::string example;
  for (int s = 0; s < n_seeds; ++s) {
    Corpus corpus = make_synthetic_corpus(cmcqrd_like_spec(), 6000 + s);
    std::vector<Question> with_dist;
    for (const auto& q : corpus.questions())
      if (q.human_dist) with_dist.push_back(q);
    Corpus subset("dist", with_dist);
    double pooled = spearman(human_difficulty_signal(subset), gold_of(subset)).rho;
    bool all_above = true;
    std::string line = fmt("pooled %.3f;", pooled);
    for (const auto& [grade, part] : split_by_grade(subset)) {
      double rho = spearman(human_difficulty_signal(part), gold_of(part)).rho;
      all_above = all_above && rho > pooled;
      line += fmt(" %s %.3f", grade.c_str(), rho);
    }
    ok_seeds += all_above;
    if (s == 0) example = line;
  }
  return {ok_seeds == n_seeds, fmt("%d/%d seeds with every grade above pooled; seed 0: %s", ok_seeds, n_seeds,
                                   example.c_str())};
}

Check prompt_fidelity(const fs::path& fixtures) {
  Corpus c = load_corpus(fixtures / "questions.jsonl");
  std::string abs = render_absolute_prompt(c.at("museum"));
  std::string cmp = render_comparative_prompt(c.at("museum"), c.at("commute"));
  bool abs_match = abs == slurp(fixtures / "absolute_museum.txt");
  bool cmp_match = cmp == slurp(fixtures / "comparative_museum_commute.txt");
  bool abs_sub = abs.find("Return only a single score.") != std::string::npos;
  bool cmp_sub = cmp.find("Return only 1 or 2.") != std::string::npos;
  return {abs_match && cmp_match && abs_sub && cmp_sub,
          fmt("absolute bytes %s, comparative bytes %s, instruction substrings %s", abs_match ? "match" : "DIFFER",
              cmp_match ? "match" : "DIFFER", abs_sub && cmp_sub ? "present" : "MISSING")};
}

Check cli_determinism(const std::string& binary) {
  auto t0 = std::chrono::steady_clock::now();
  fs::path root = fs::temp_directory_path() / fmt("qdrank_acceptance_%d", int(getpid()));
  fs::remove_all(root);
  fs::create_directories(root);
  std::string corpus = (root / "corpus.jsonl").string();
  auto sh = [&](const std::string& args) {
    std::string cmd = "\"" + binary + "\" " + args + " > /dev/null";
    return std::system(cmd.c_str());
  };
  if (sh("simulate --preset cmcqrd --seed 42 --out \"" + corpus + "\"") != 0) return {false, "simulate failed"};
  std::vector<std::string> dirs;
  for (const char* par : {"1", "1", "8", "8"}) {
    std::string dir = (root / fmt("run%zu_p%s", dirs.size(), par)).string();
    int rc = sh("estimate --corpus \"" + corpus + "\" --method comparative --judge sim --seed 42 --parallelism " +
                std::string(par) + " --out-dir \"" + dir + "\"");
    if (rc != 0) return {false, "estimate failed with status " + std::to_string(rc)};
    dirs.push_back(dir);
  }
  bool same = true;
  std::size_t bytes = 0;
  for (const char* f : {"comparative_scores.csv", "comparative_records.csv"}) {
    std::string ref = slurp(fs::path(dirs[0]) / f);
    bytes += ref.size();
    for (const auto& d : dirs) same = same && !ref.empty() && slurp(fs::path(d) / f) == ref;
  }
  fs::remove_all(root);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {same, fmt("4 runs (parallelism 1,1,8,8) %s, %zu bytes compared, %.1fs", same ? "byte-identical" : "DIFFER",
                    bytes, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <qdrank-binary> <fixture-dir>\n", argv[0]);
    return 2;
  }
  const std::string binary = argv[1];
  const fs::path fixtures = argv[2];

  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"spearman-oracle", spearman_oracle},
      {"level-map-exact", level_map_exact},
      {"perfect-judge-recovery", perfect_recovery},
      {"k-curve-plateau-and-variance", k_curve_property},
      {"comparative-beats-absolute", comparative_beats_absolute},
      {"combination-gain", combination_gain},
      {"position-bias-calibration", bias_calibration},
      {"rasch-recovery-and-invariance", rasch_recovery},
      {"per-grade-above-pooled", grade_pattern},
      {"prompt-fidelity", [&] { return prompt_fidelity(fixtures); }},
      {"cli-determinism", [&] { return cli_determinism(binary); }},
  };

  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Check o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %-30s %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
