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

#include "qdrank/scheduler.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "qdrank/csv.hpp"

namespace qdrank {

std::string_view to_string(PositionPolicy p) {
  switch (p) {
    case PositionPolicy::kTargetFirst: return "target-first";
    case PositionPolicy::kTargetSecond: return "target-second";
    case PositionPolicy::kRandom: return "random";
    case PositionPolicy::kBalanced: return "balanced";
  }
  return "random";
}

std::optional<PositionPolicy> parse_position_policy(std::string_view name) {
  for (auto p : {PositionPolicy::kTargetFirst, PositionPolicy::kTargetSecond, PositionPolicy::kRandom,
                 PositionPolicy::kBalanced}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

void parallel_for(std::size_t n, int parallelism, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(parallelism, 1)), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < n && !failed.load(); i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(error_mu);
            if (!first_error) first_error = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

std::vector<std::string> sample_opponents(std::string_view target_id, const Corpus& corpus, int k, Rng& stream) {
  const std::size_t n = corpus.size();
  auto self = corpus.index_of(target_id);
  const std::size_t pool_size = self ? n - 1 : n;
  if (k < 0 || static_cast<std::size_t>(k) > pool_size) {
    throw Error(ErrorCode::kKTooLarge, "K=" + std::to_string(k) + " but only " + std::to_string(pool_size) +
                                           " other questions are available");
  }
  std::vector<std::size_t> pool;
  pool.reserve(pool_size);
  for (std::size_t i = 0; i < n; ++i) {
    if (!self || i != *self) pool.push_back(i);
  }
  // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < static_cast<std::size_t>(k); ++i) {
    std::size_t j = i + static_cast<std::size_t>(stream.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    out.push_back(corpus[pool[i]].id);
  }
  return out;
}

Position target_position(PositionPolicy policy, std::uint64_t seed, std::string_view target_id,
                         std::string_view opponent_id, int draw, int j) {
  switch (policy) {
    case PositionPolicy::kTargetFirst: return Position::kFirst;
    case PositionPolicy::kTargetSecond: return Position::kSecond;
    case PositionPolicy::kBalanced: return j % 2 == 0 ? Position::kFirst : Position::kSecond;
    case PositionPolicy::kRandom: {
      Rng stream = Rng::derive(seed, "position", target_id, opponent_id, draw);
      return stream.uniform() < 0.5 ? Position::kFirst : Position::kSecond;
    }
  }
  return Position::kFirst;
}

JudgeRunError::JudgeRunError(const Error& cause, std::vector<ComparisonRecord> partial)
    : Error(ErrorCode::kJudgeFailure, std::string(cause.what()) + " (" + std::to_string(partial.size()) +
                                          " records completed)"),
      cause_(cause.code()),
      partial_(std::move(partial)) {}

namespace {

void check_run_config(const Corpus& corpus, const RunConfig& cfg) {
  if (cfg.k < 1) throw Error(ErrorCode::kInvalidArgument, "K must be >= 1");
  if (cfg.draws < 1) throw Error(ErrorCode::kInvalidArgument, "draws must be >= 1");
  if (corpus.size() == 0) throw Error(ErrorCode::kInvalidArgument, "empty corpus");
}

bool record_less(const ComparisonRecord& a, const ComparisonRecord& b) {
  return std::tie(a.draw_index, a.target_id, a.opponent_id, a.target_position) <
         std::tie(b.draw_index, b.target_id, b.opponent_id, b.target_position);
}

std::vector<ComparisonRecord> judge_target(const Corpus& corpus, const Judge& judge, const RunConfig& cfg,
                                           const Question& target, int draw) {
  Rng stream = Rng::derive(cfg.seed, "opponents", target.id, draw);
  auto opponents = sample_opponents(target.id, corpus, cfg.k, stream);
  std::vector<ComparisonRecord> out;
  out.reserve(opponents.size());
  for (std::size_t j = 0; j < opponents.size(); ++j) {
    const Question& opp = corpus.at(opponents[j]);
    Position pos = target_position(cfg.position_policy, cfg.seed, target.id, opp.id, draw, static_cast<int>(j));
    const Question& first = pos == Position::kFirst ? target : opp;
    const Question& second = pos == Position::kFirst ? opp : target;

    Verdict v;
    for (int attempt = 0; attempt <= judge.max_retries(); ++attempt) {
      CallKey key{target.id, opp.id, draw, static_cast<int>(j), pos, attempt};
      v = parse_comparative(judge.compare(first, second, key));
      if (v.value != VerdictValue::kUnparsed) break;
    }
    out.push_back({target.id, opp.id, pos, resolve_outcome(pos, v.value), draw, std::move(v.raw)});
  }
  return out;
}

}  // namespace

ComparativeRun run_comparative(const Corpus& corpus, const Judge& judge, const RunConfig& cfg) {
  check_run_config(corpus, cfg);
  if (static_cast<std::size_t>(cfg.k) > corpus.size() - 1) {
    throw Error(ErrorCode::kKTooLarge, "K=" + std::to_string(cfg.k) + " exceeds corpus size - 1 (" +
                                           std::to_string(corpus.size() - 1) + ")");
  }
  const std::size_t n = corpus.size();
  ComparativeRun run;
  run.draws.reserve(static_cast<std::size_t>(cfg.draws));
  for (int draw = 0; draw < cfg.draws; ++draw) {
    std::vector<std::optional<std::vector<ComparisonRecord>>> per_target(n);
    try {
      parallel_for(n, judge.parallelism(),
                   [&](std::size_t i) { per_target[i] = judge_target(corpus, judge, cfg, corpus[i], draw); });
    } catch (const Error& e) {
      auto partial = std::move(run.records);
      for (auto& recs : per_target) {
        if (recs) partial.insert(partial.end(), recs->begin(), recs->end());
      }
      std::sort(partial.begin(), partial.end(), record_less);
      throw JudgeRunError(e, std::move(partial));
    }
    std::vector<DifficultyEstimate> estimates;
    estimates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      estimates.push_back({corpus[i].id, Method::kComparative, win_count(*per_target[i]), draw});
      run.records.insert(run.records.end(), std::make_move_iterator(per_target[i]->begin()),
                         std::make_move_iterator(per_target[i]->end()));
    }
    run.draws.push_back(std::move(estimates));
  }
  std::sort(run.records.begin(), run.records.end(), record_less);
  return run;
}

AbsoluteRun run_absolute(const Corpus& corpus, const Judge& judge, const RunConfig& cfg) {
  check_run_config(corpus, cfg);
  const std::size_t n = corpus.size();
  AbsoluteRun run;
  std::atomic<std::size_t> dropped{0};
  for (int draw = 0; draw < cfg.draws; ++draw) {
    std::vector<double> scores(n);
    parallel_for(n, judge.parallelism(), [&](std::size_t i) {
      const Question& q = corpus[i];
      std::vector<double> samples;
      samples.reserve(static_cast<std::size_t>(cfg.k));
      for (int slot = 0; slot < cfg.k; ++slot) {
        for (int attempt = 0; attempt <= judge.max_retries(); ++attempt) {
          CallKey key{q.id, {}, draw, slot, Position::kFirst, attempt};
          if (auto v = try_parse_absolute(judge.absolute(q, key))) {
            samples.push_back(*v);
            break;
          }
          if (attempt == judge.max_retries()) ++dropped;
        }
      }
      if (samples.empty()) {
        throw Error(ErrorCode::kAllSamplesUnparseable, "no parseable absolute score for '" + q.id + "'");
      }
      scores[i] = absolute_aggregate(samples);
    });
    std::vector<DifficultyEstimate> estimates;
    estimates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) estimates.push_back({corpus[i].id, Method::kAbsolute, scores[i], draw});
    run.draws.push_back(std::move(estimates));
  }
  run.dropped_samples = dropped.load();
  return run;
}

BiasReport measure_position_bias(const Corpus& corpus, const Judge& judge, int n_pairs, Rng& stream) {
  if (n_pairs < 1) throw Error(ErrorCode::kInvalidArgument, "n_pairs must be >= 1");
  if (corpus.size() < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two questions");
  const std::size_t pairs = static_cast<std::size_t>(n_pairs);
  const std::size_t n = corpus.size();

  std::vector<std::pair<std::size_t, std::size_t>> sampled(pairs);
  for (auto& [a, b] : sampled) {
    a = static_cast<std::size_t>(stream.below(n));
    b = static_cast<std::size_t>(stream.below(n - 1));
    if (b >= a) ++b;
  }

  // [pair] -> (verdict with a first, verdict with b first)
  std::vector<std::pair<VerdictValue, VerdictValue>> verdicts(pairs);
  auto ask = [&](const Question& first, const Question& second, const Question& a, const Question& b,
                 int pair, Position a_pos) {
    Verdict v;
    for (int attempt = 0; attempt <= judge.max_retries(); ++attempt) {
      CallKey key{a.id, b.id, pair, 0, a_pos, attempt};
      v = parse_comparative(judge.compare(first, second, key));
      if (v.value != VerdictValue::kUnparsed) break;
    }
    return v.value;
  };
  parallel_for(pairs, judge.parallelism(), [&](std::size_t p) {
    const Question& a = corpus[sampled[p].first];
    const Question& b = corpus[sampled[p].second];
    verdicts[p] = {ask(a, b, a, b, static_cast<int>(p), Position::kFirst),
                   ask(b, a, a, b, static_cast<int>(p), Position::kSecond)};
  });

  BiasReport report;
  report.n_pairs = pairs;
  std::size_t first_picks = 0, both_parsed = 0, inconsistent = 0;
  for (const auto& [ab, ba] : verdicts) {
    for (auto v : {ab, ba}) {
      if (v == VerdictValue::kUnparsed) {
        ++report.unparsed;
      } else {
        ++report.judgments;
        if (v == VerdictValue::kFirst) ++first_picks;
      }
    }
    if (ab != VerdictValue::kUnparsed && ba != VerdictValue::kUnparsed) {
      ++both_parsed;
      if (ab == ba) ++inconsistent;
    }
  }
  if (report.judgments == 0) throw Error(ErrorCode::kAllUnparsed, "every bias judgment was unparsed");
  report.first_pick_rate = static_cast<double>(first_picks) / static_cast<double>(report.judgments);
  report.first_pick_excess = report.first_pick_rate - 0.5;
  report.inconsistency_rate =
      both_parsed ? static_cast<double>(inconsistent) / static_cast<double>(both_parsed) : 0.0;
  return report;
}

void write_records_csv(std::ostream& out, const std::vector<ComparisonRecord>& records) {
  out << kRecordsHeader << '\n';
  for (const auto& r : records) {
    out << csv::join_row({r.target_id, r.opponent_id, std::string(to_string(r.target_position)),
                          std::string(to_string(r.verdict)), std::to_string(r.draw_index)})
        << '\n';
  }
}

void write_raw_replies_jsonl(std::ostream& out, const std::vector<ComparisonRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j = {{"target_id", r.target_id},
                                {"opponent_id", r.opponent_id},
                                {"target_position", to_string(r.target_position)},
                                {"draw_index", r.draw_index},
                                {"verdict", to_string(r.verdict)},
                                {"raw", r.raw}};
    out << j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
}

}  // namespace qdrank
