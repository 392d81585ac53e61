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

#include "qdrank/rasch.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

#include "json.hpp"
#include "qdrank/csv.hpp"
#include "qdrank/error.hpp"
#include "qdrank/judge.hpp"
#include "qdrank/ranking.hpp"

namespace qdrank {

namespace {

constexpr double kMaxNewtonStep = 1.0;

void check_skew(std::span<const double> skew) {
  if (skew.empty()) throw Error(ErrorCode::kInvalidSkew, "distractor skew is empty");
  double total = 0.0;
  for (double s : skew) {
    if (!std::isfinite(s) || s < 0.0) throw Error(ErrorCode::kInvalidSkew, "skew entries must be >= 0");
    total += s;
  }
  if (std::abs(total - 1.0) > kProbabilityTolerance) {
    throw Error(ErrorCode::kInvalidSkew, "distractor skew must sum to 1");
  }
}

std::size_t pick(std::span<const double> weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  return weights.size() - 1;
}

// Core JML on a fully non-degenerate submatrix.
RaschFit fit_rows_cols(const ResponseMatrix& m, std::vector<std::size_t> rows, std::vector<std::size_t> cols,
                       double tol, int max_iter) {
  const std::size_t ne = rows.size();
  const std::size_t ni = cols.size();
  std::vector<double> raw(ne, 0.0), item_score(ni, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    for (std::size_t i = 0; i < ni; ++i) {
      if (m.at(rows[e], cols[i])) {
        raw[e] += 1.0;
        item_score[i] += 1.0;
      }
    }
  }
  std::vector<double> theta(ne), b(ni);
  for (std::size_t e = 0; e < ne; ++e) theta[e] = std::log(raw[e] / (static_cast<double>(ni) - raw[e]));
  for (std::size_t i = 0; i < ni; ++i) b[i] = std::log((static_cast<double>(ne) - item_score[i]) / item_score[i]);

  auto center = [&] {
    double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / static_cast<double>(ne);
    for (double& t : theta) t -= mean;
    for (double& d : b) d -= mean;
  };
  center();

  std::vector<double> p(ne * ni);
  auto refresh = [&] {
    for (std::size_t e = 0; e < ne; ++e) {
      for (std::size_t i = 0; i < ni; ++i) p[e * ni + i] = logistic(theta[e] - b[i]);
    }
  };

  for (int iter = 1; iter <= max_iter; ++iter) {
    double max_change = 0.0;
    refresh();
    for (std::size_t e = 0; e < ne; ++e) {
      double expected = 0.0, info = 0.0;
      for (std::size_t i = 0; i < ni; ++i) {
        double pe = p[e * ni + i];
        expected += pe;
        info += pe * (1.0 - pe);
      }
      double step = std::clamp((raw[e] - expected) / info, -kMaxNewtonStep, kMaxNewtonStep);
      theta[e] += step;
      max_change = std::max(max_change, std::abs(step));
    }
    refresh();
    for (std::size_t i = 0; i < ni; ++i) {
      double expected = 0.0, info = 0.0;
      for (std::size_t e = 0; e < ne; ++e) {
        double pe = p[e * ni + i];
        expected += pe;
        info += pe * (1.0 - pe);
      }
      double step = std::clamp((expected - item_score[i]) / info, -kMaxNewtonStep, kMaxNewtonStep);
      b[i] += step;
      max_change = std::max(max_change, std::abs(step));
    }
    center();
    if (max_change < tol) {
      RaschFit fit;
      fit.params = {std::move(theta), std::move(b)};
      fit.kept_items = std::move(cols);
      fit.kept_examinees = std::move(rows);
      fit.iterations = iter;
      return fit;
    }
  }
  throw Error(ErrorCode::kNonConvergence, "JML did not converge in " + std::to_string(max_iter) + " iterations");
}

std::uint64_t bits(double v) { return std::bit_cast<std::uint64_t>(v); }

}  // namespace

double ResponseMatrix::proportion_correct(std::size_t item) const {
  std::size_t c = 0;
  for (std::size_t e = 0; e < n_examinees; ++e) c += at(e, item) ? 1 : 0;
  return static_cast<double>(c) / static_cast<double>(n_examinees);
}

AnswerDistribution ResponseMatrix::answer_distribution(std::size_t item, std::size_t correct_index) const {
  const auto& counts = choice_counts.at(item);
  if (correct_index >= counts.size()) throw Error(ErrorCode::kIndexOutOfRange, "correct index out of range");
  std::vector<double> probs(counts.size());
  const double total = static_cast<double>(n_examinees);
  std::size_t distractor = 1;
  for (std::size_t slot = 0; slot < counts.size(); ++slot) {
    std::size_t c = slot == correct_index ? counts[0] : counts[distractor++];
    probs[slot] = static_cast<double>(c) / total;
  }
  return AnswerDistribution::from(std::move(probs));
}

ResponseMatrix simulate_cohort(int n_examinees, std::span<const double> difficulties, double theta_mean,
                               double theta_std, std::span<const double> distractor_skew, Rng& stream,
                               std::vector<std::string> item_ids) {
  if (n_examinees < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one examinee");
  if (!(theta_std >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "theta_std must be >= 0");
  check_skew(distractor_skew);

  ResponseMatrix m;
  m.n_examinees = static_cast<std::size_t>(n_examinees);
  m.n_items = difficulties.size();
  m.correct.assign(m.n_examinees * m.n_items, 0);
  if (item_ids.empty()) {
    for (std::size_t i = 0; i < m.n_items; ++i) item_ids.push_back("item" + std::to_string(i));
  }
  if (item_ids.size() != m.n_items) throw Error(ErrorCode::kInvalidArgument, "item id count mismatch");
  m.item_ids = std::move(item_ids);
  m.choice_counts.assign(m.n_items, std::vector<std::size_t>(distractor_skew.size() + 1, 0));

  for (std::size_t e = 0; e < m.n_examinees; ++e) {
    double theta = stream.normal(theta_mean, theta_std);
    for (std::size_t i = 0; i < m.n_items; ++i) {
      double u_correct = stream.uniform();
      double u_choice = stream.uniform();
      if (u_correct < logistic(theta - difficulties[i])) {
        m.correct[e * m.n_items + i] = 1;
        ++m.choice_counts[i][0];
      } else {
        ++m.choice_counts[i][1 + pick(distractor_skew, u_choice)];
      }
    }
  }
  return m;
}

RaschParams fit_difficulty(const ResponseMatrix& m, double tol, int max_iter) {
  if (m.n_items == 0 || m.n_examinees == 0) throw Error(ErrorCode::kDegenerateInput, "empty response matrix");
  for (std::size_t i = 0; i < m.n_items; ++i) {
    std::size_t s = 0;
    for (std::size_t e = 0; e < m.n_examinees; ++e) s += m.at(e, i);
    if (s == 0 || s == m.n_examinees) {
      throw Error(ErrorCode::kDegenerateItem, "item '" + m.item_ids[i] + "' is " +
                                                  (s == 0 ? "never" : "always") + " answered correctly");
    }
  }
  for (std::size_t e = 0; e < m.n_examinees; ++e) {
    std::size_t r = 0;
    for (std::size_t i = 0; i < m.n_items; ++i) r += m.at(e, i);
    if (r == 0 || r == m.n_items) {
      throw Error(ErrorCode::kDegenerateExaminee, "examinee " + std::to_string(e) + " has a " +
                                                      (r == 0 ? "zero" : "perfect") + " score");
    }
  }
  std::vector<std::size_t> rows(m.n_examinees), cols(m.n_items);
  std::iota(rows.begin(), rows.end(), 0);
  std::iota(cols.begin(), cols.end(), 0);
  return fit_rows_cols(m, std::move(rows), std::move(cols), tol, max_iter).params;
}

RaschFit fit_difficulty_lenient(const ResponseMatrix& m, double tol, int max_iter) {
  std::vector<bool> row_ok(m.n_examinees, true), col_ok(m.n_items, true);
  bool changed = true;
  while (changed) {
    changed = false;
    std::size_t live_rows = std::count(row_ok.begin(), row_ok.end(), true);
    std::size_t live_cols = std::count(col_ok.begin(), col_ok.end(), true);
    for (std::size_t i = 0; i < m.n_items; ++i) {
      if (!col_ok[i]) continue;
      std::size_t s = 0;
      for (std::size_t e = 0; e < m.n_examinees; ++e) s += row_ok[e] && m.at(e, i);
      if (s == 0 || s == live_rows) {
        col_ok[i] = false;
        changed = true;
        --live_cols;
      }
    }
    for (std::size_t e = 0; e < m.n_examinees; ++e) {
      if (!row_ok[e]) continue;
      std::size_t r = 0;
      for (std::size_t i = 0; i < m.n_items; ++i) r += col_ok[i] && m.at(e, i);
      if (r == 0 || r == live_cols) {
        row_ok[e] = false;
        changed = true;
      }
    }
  }
  std::vector<std::size_t> rows, cols;
  for (std::size_t e = 0; e < m.n_examinees; ++e) {
    if (row_ok[e]) rows.push_back(e);
  }
  for (std::size_t i = 0; i < m.n_items; ++i) {
    if (col_ok[i]) cols.push_back(i);
  }
  if (cols.size() < 2 || rows.empty()) {
    throw Error(ErrorCode::kDegenerateItem, "fewer than two items remain after dropping degenerate responses");
  }
  const std::size_t dropped_items = m.n_items - cols.size();
  const std::size_t dropped_rows = m.n_examinees - rows.size();
  if (dropped_items > 0 || dropped_rows > 0) {
    std::fprintf(stderr, "warning: dropped %zu degenerate item(s) and %zu degenerate examinee(s) before fitting\n",
                 dropped_items, dropped_rows);
  }
  return fit_rows_cols(m, std::move(rows), std::move(cols), tol, max_iter);
}

CohortInvarianceReport cohort_invariance_report(std::span<const double> difficulties, CohortSpec cohort_a,
                                                CohortSpec cohort_b, int n_each, std::uint64_t seed) {
  const std::vector<double> uniform_skew = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  auto fit_cohort = [&](CohortSpec c, std::size_t& dropped) {
    Rng stream = Rng::derive(seed, "cohort", bits(c.mean), bits(c.std));
    auto m = simulate_cohort(n_each, difficulties, c.mean, c.std, uniform_skew, stream);
    auto fit = fit_difficulty_lenient(m);
    dropped = m.n_items - fit.kept_items.size();
    std::vector<std::optional<double>> out(difficulties.size());
    for (std::size_t k = 0; k < fit.kept_items.size(); ++k) out[fit.kept_items[k]] = fit.params.difficulties[k];
    return out;
  };
  CohortInvarianceReport report;
  report.fitted_a = fit_cohort(cohort_a, report.dropped_items_a);
  report.fitted_b = fit_cohort(cohort_b, report.dropped_items_b);

  ScoreList a, b;
  for (std::size_t i = 0; i < difficulties.size(); ++i) {
    if (report.fitted_a[i] && report.fitted_b[i]) {
      std::string id = "item" + std::to_string(i);
      a.push_back({id, *report.fitted_a[i]});
      b.push_back({id, *report.fitted_b[i]});
    }
  }
  report.items_compared = a.size();
  report.rho_ab = spearman(a, b).rho;
  return report;
}

SyntheticSpec cmcqrd_like_spec() {
  SyntheticSpec spec;
  spec.grades = {
      {"B1", 140, 115, -1.5, 0.5, std::nullopt},
      {"B2", 327, 222, -0.5, 0.5, std::nullopt},
      {"C1", 137, 72, 0.5, 0.5, std::nullopt},
      {"C2", 54, 39, 1.5, 0.5, std::nullopt},
  };
  return spec;
}

void validate(const SyntheticSpec& spec) {
  if (spec.grades.empty()) throw Error(ErrorCode::kInvalidSpec, "spec has no grades");
  for (const auto& g : spec.grades) {
    if (!is_known_grade(g.grade)) throw Error(ErrorCode::kInvalidSpec, "unknown grade '" + g.grade + "'");
    if (g.count < 1) throw Error(ErrorCode::kInvalidSpec, "grade " + g.grade + " needs count >= 1");
    if (g.with_dist > g.count) throw Error(ErrorCode::kInvalidSpec, "grade " + g.grade + ": with_dist > count");
    if (!(g.std >= 0.0) || !std::isfinite(g.mean)) {
      throw Error(ErrorCode::kInvalidSpec, "grade " + g.grade + ": bad difficulty mean/std");
    }
  }
  for (std::size_t i = 0; i < spec.grades.size(); ++i) {
    for (std::size_t j = i + 1; j < spec.grades.size(); ++j) {
      if (spec.grades[i].grade == spec.grades[j].grade) {
        throw Error(ErrorCode::kInvalidSpec, "grade " + spec.grades[i].grade + " listed twice");
      }
    }
  }
  if (spec.examinees_per_grade < 1) throw Error(ErrorCode::kInvalidSpec, "examinees_per_grade must be >= 1");
  if (!(spec.theta_std >= 0.0)) throw Error(ErrorCode::kInvalidSpec, "theta_std must be >= 0");
  if (spec.distractor_skew.size() + 1 > 4) throw Error(ErrorCode::kInvalidSpec, "at most 3 distractors");
  try {
    check_skew(spec.distractor_skew);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
}

SyntheticSpec parse_synthetic_spec(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("malformed JSON: ") + e.what());
  }
  SyntheticSpec spec;
  try {
    for (const auto& g : j.at("grades")) {
      GradeSpec gs;
      gs.grade = g.at("grade").get<std::string>();
      gs.count = g.at("count").get<int>();
      gs.with_dist = g.value("with_dist", -1);
      gs.mean = g.value("mean", 0.0);
      gs.std = g.value("std", 1.0);
      if (g.contains("cohort_mean")) gs.cohort_mean = g.at("cohort_mean").get<double>();
      spec.grades.push_back(std::move(gs));
    }
    spec.examinees_per_grade = j.value("examinees_per_grade", spec.examinees_per_grade);
    spec.theta_std = j.value("theta_std", spec.theta_std);
    if (j.contains("distractor_skew")) spec.distractor_skew = j.at("distractor_skew").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidSpec, e.what());
  }
  validate(spec);
  return spec;
}

Corpus make_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed, std::string name) {
  validate(spec);
  const std::size_t n_options = spec.distractor_skew.size() + 1;
  std::vector<Question> questions;
  for (const auto& g : spec.grades) {
    Rng items = Rng::derive(seed, "synthetic/items", g.grade);
    const std::size_t first = questions.size();
    std::vector<double> gold(static_cast<std::size_t>(g.count));
    for (int k = 0; k < g.count; ++k) {
      Question q;
      char id[64];
      std::snprintf(id, sizeof(id), "%s-%03d", g.grade.c_str(), k + 1);
      q.id = id;
      q.context = "Synthetic passage for item " + q.id + ".";
      q.question = "Synthetic question " + q.id + "?";
      for (std::size_t o = 0; o < n_options; ++o) q.options.push_back("Option " + std::string(1, static_cast<char>('A' + o)));
      q.correct_index = static_cast<std::size_t>(items.below(n_options));
      q.grade = g.grade;
      q.gold_difficulty = items.normal(g.mean, g.std);
      gold[static_cast<std::size_t>(k)] = *q.gold_difficulty;
      questions.push_back(std::move(q));
    }

    const int with_dist = g.with_dist < 0 ? g.count : g.with_dist;
    if (with_dist > 0) {
      Rng cohort = Rng::derive(seed, "synthetic/cohort", g.grade);
      std::span<const double> tested(gold.data(), static_cast<std::size_t>(with_dist));
      auto m = simulate_cohort(spec.examinees_per_grade, tested, g.cohort_mean.value_or(g.mean), spec.theta_std,
                               spec.distractor_skew, cohort);
      for (std::size_t k = 0; k < tested.size(); ++k) {
        Question& q = questions[first + k];
        q.human_dist = m.answer_distribution(k, q.correct_index);
      }
    }
  }
  return Corpus(std::move(name), std::move(questions));
}

void write_fit_csv(std::ostream& out, const ResponseMatrix& m, const RaschFit& fit) {
  out << "item_id,b_hat\n";
  for (std::size_t k = 0; k < fit.kept_items.size(); ++k) {
    out << csv::join_row({m.item_ids[fit.kept_items[k]], csv::format_double(fit.params.difficulties[k])}) << '\n';
  }
}

}  // namespace qdrank
