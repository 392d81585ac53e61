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

#include "cli.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "qdrank/corpus.hpp"
#include "qdrank/csv.hpp"
#include "qdrank/error.hpp"
#include "qdrank/estimators.hpp"
#include "qdrank/judge.hpp"
#include "qdrank/ranking.hpp"
#include "qdrank/rasch.hpp"
#include "qdrank/rng.hpp"
#include "qdrank/scheduler.hpp"

namespace qdrank::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

struct Settings {
  std::uint64_t seed = 0;
  std::string config;
  std::string out_dir = ".";
  int parallelism = 1;

  std::string corpus;
  std::string method;
  std::vector<std::string> probs;
  int k = 250;
  int draws = 30;
  std::string position_policy = "random";
  bool dump_raw = false;

  std::string judge;
  double sim_beta = 1.5;
  double sim_epsilon = 0.0;
  double sim_sigma = 1.0;
  double sim_scale_lo = -5.0;
  double sim_scale_hi = 5.0;
  std::string base_url;
  std::string model;
  double temperature = 1.0;
  int max_tokens = 16;
  int max_retries = 3;
  double timeout = 60.0;

  std::string gold;
  std::vector<std::string> scores;
  bool combine = false;
  bool group_by_grade = false;

  std::vector<int> k_list;
  std::string curve_method = "both";

  int n_pairs = 1000;

  std::string spec;
  std::string preset;
  std::string out;
};

// A flag that a JSON config file may also set. Flags given on the command
// line win over the config file, which wins over defaults.
struct ConfigBinding {
  std::string key;
  CLI::Option* option;
  std::function<void(const json&)> assign;
};

using Bindings = std::vector<ConfigBinding>;

template <typename T>
CLI::Option* bind_option(CLI::App* app, Bindings& b, const std::string& flag, T& field, const std::string& key,
                  const std::string& help) {
  CLI::Option* opt = app->add_option(flag, field, help);
  b.push_back({key, opt, [&field](const json& j) { field = j.get<T>(); }});
  return opt;
}

CLI::Option* bind_switch(CLI::App* app, Bindings& b, const std::string& flag, bool& field, const std::string& key,
                       const std::string& help) {
  CLI::Option* opt = app->add_flag(flag, field, help);
  b.push_back({key, opt, [&field](const json& j) { field = j.get<bool>(); }});
  return opt;
}

void apply_config(const std::string& path, const Bindings& bindings, std::ostream& err) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config '" + path + "'");
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kSchema, "config '" + path + "': " + e.what());
  }
  if (!cfg.is_object()) throw Error(ErrorCode::kSchema, "config '" + path + "' must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    std::string lowered = key;
    std::transform(lowered.begin(), lowered.end(), lowered.begin(), ::tolower);
    if (lowered.find("key") != std::string::npos || lowered.find("token") != std::string::npos) {
      throw Error(ErrorCode::kJudgeConfig, "config key '" + key + "' looks like a secret; set " +
                                               std::string(kApiKeyEnv) + " in the environment instead");
    }
    auto it = std::find_if(bindings.begin(), bindings.end(), [&](const ConfigBinding& b) { return b.key == key; });
    if (it == bindings.end()) {
      err << "warning: config key '" << key << "' is not used by this command\n";
      continue;
    }
    if (it->option->count() > 0) continue;
    try {
      it->assign(value);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kSchema, "config key '" + key + "': " + e.what());
    }
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 failed");
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

std::string utc_now() {
  auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string percent(double rho) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1f", rho * 100.0);
  return buf;
}

// Provenance record written next to every command's outputs.
class Manifest {
 public:
  Manifest(std::string command, const std::vector<std::string>& args, const Settings& s, json config)
      : command_(std::move(command)) {
    j_["tool"] = "qdrank";
    j_["version"] = kToolVersion;
    j_["command"] = command_;
    j_["arguments"] = args;
    j_["seed"] = s.seed;
    j_["config"] = std::move(config);
    j_["prompt_template_version"] = std::string(kPromptTemplateVersion);
    j_["started_at"] = utc_now();
    j_["artifacts"] = json::array();
  }

  void input(const std::string& role, const std::string& path) {
    j_["inputs"].push_back({{"role", role}, {"path", path}, {"sha256", sha256_hex(read_file(path))}});
  }

  // Writes the artifact and records its checksum.
  void emit(const fs::path& dir, const std::string& name, const std::string& content) {
    write_file(dir / name, content);
    j_["artifacts"].push_back({{"path", name}, {"sha256", sha256_hex(content)}});
  }

  void finish(const fs::path& dir) {
    j_["finished_at"] = utc_now();
    write_file(dir / ("manifest_" + command_ + ".json"), j_.dump(2) + "\n");
  }

 private:
  std::string command_;
  json j_;
};

json judge_snapshot(const Settings& s) {
  json j = {{"judge", s.judge}, {"parallelism", s.parallelism}};
  if (s.judge == "sim") {
    j["sim_beta"] = s.sim_beta;
    j["sim_epsilon"] = s.sim_epsilon;
    j["sim_sigma"] = s.sim_sigma;
    j["sim_scale_lo"] = s.sim_scale_lo;
    j["sim_scale_hi"] = s.sim_scale_hi;
  } else if (s.judge == "remote") {
    j["base_url"] = s.base_url;
    j["model"] = s.model;
    j["temperature"] = s.temperature;
    j["max_tokens"] = s.max_tokens;
    j["max_retries"] = s.max_retries;
    j["timeout"] = s.timeout;
  }
  return j;
}

std::unique_ptr<Judge> make_judge(const Settings& s) {
  if (s.judge.empty()) {
    throw Error(ErrorCode::kJudgeConfig, "zero-shot methods need a judge (--judge sim|remote)");
  }
  if (s.judge == "sim") {
    SimJudgeParams p{s.sim_beta, s.sim_epsilon, s.sim_sigma, s.sim_scale_lo, s.sim_scale_hi, s.seed};
    return std::make_unique<SimulatedJudge>(p, s.parallelism);
  }
  if (s.judge == "remote") {
    JudgeConfig cfg;
    cfg.backend = Backend::kRemote;
    cfg.base_url = s.base_url;
    cfg.model = s.model;
    cfg.temperature = s.temperature;
    cfg.max_output_tokens = s.max_tokens;
    cfg.max_retries = s.max_retries;
    cfg.parallelism = s.parallelism;
    cfg.timeout_seconds = s.timeout;
    return std::make_unique<RemoteJudge>(cfg);
  }
  throw Error(ErrorCode::kJudgeConfig, "unknown judge backend '" + s.judge + "'");
}

RunConfig run_config(const Settings& s) {
  auto policy = parse_position_policy(s.position_policy);
  if (!policy) throw Error(ErrorCode::kInvalidArgument, "unknown position policy '" + s.position_policy + "'");
  return RunConfig{s.k, s.draws, s.seed, *policy};
}

std::string estimates_csv(const std::vector<DifficultyEstimate>& estimates) {
  std::ostringstream ss;
  write_estimates_csv(ss, estimates);
  return ss.str();
}

std::vector<DifficultyEstimate> flatten(const std::vector<std::vector<DifficultyEstimate>>& draws) {
  std::vector<DifficultyEstimate> out;
  for (const auto& d : draws) out.insert(out.end(), d.begin(), d.end());
  return out;
}

ScoreList gold_scores(const Corpus& corpus) {
  ScoreList gold;
  for (const auto& q : corpus.questions()) {
    if (q.gold_difficulty) gold.push_back({q.id, *q.gold_difficulty});
  }
  if (gold.empty()) throw Error(ErrorCode::kMissingGold, "corpus has no gold_difficulty values");
  return gold;
}

// ---------------------------------------------------------------- commands

int cmd_validate(const Settings& s, std::ostream& out) {
  Corpus corpus = load_corpus(s.corpus);
  struct Counts {
    std::size_t n = 0, gold = 0, dist = 0;
  };
  std::map<std::string, Counts, GradeLess> by_grade;
  Counts total;
  for (const auto& q : corpus.questions()) {
    for (Counts* c : {&by_grade[q.grade.value_or("-")], &total}) {
      ++c->n;
      c->gold += q.gold_difficulty.has_value();
      c->dist += q.human_dist.has_value();
    }
  }
  out << "corpus " << corpus.name() << ": " << total.n << " questions\n";
  out << std::left << std::setw(8) << "grade" << std::right << std::setw(8) << "count" << std::setw(8) << "gold"
      << std::setw(12) << "count-dist" << '\n';
  auto row = [&](const std::string& label, const Counts& c) {
    out << std::left << std::setw(8) << label << std::right << std::setw(8) << c.n << std::setw(8) << c.gold
        << std::setw(12) << c.dist << '\n';
  };
  for (const auto& [grade, c] : by_grade) row(grade, c);
  row("all", total);
  out << "dist-coverage " << total.dist << "/" << total.n << '\n';
  out << "gold-coverage " << total.gold << "/" << total.n << '\n';
  return kExitOk;
}

int cmd_estimate(const Settings& s, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  auto method = parse_method(s.method);
  if (!method || *method == Method::kCombined) {
    throw Error(ErrorCode::kInvalidArgument, "--method must be level, rc, absolute, comparative or human");
  }
  Corpus corpus = load_corpus(s.corpus);
  json snapshot = {{"method", s.method}, {"corpus", s.corpus}};
  const fs::path dir = s.out_dir;
  const std::string prefix = std::string(to_string(*method));

  std::vector<DifficultyEstimate> estimates;
  std::vector<ComparisonRecord> records;
  std::size_t skipped = 0;

  switch (*method) {
    case Method::kLevel: {
      if (s.probs.empty()) throw Error(ErrorCode::kMissingProbs, "method level needs --probs with level records");
      std::vector<std::vector<LevelDistribution>> members(corpus.size());
      for (const auto& path : s.probs) {
        Corpus attached = attach_probs(corpus, path, ProbKind::kLevel);
        for (std::size_t i = 0; i < attached.size(); ++i) {
          if (attached[i].level_probs) members[i].push_back(*attached[i].level_probs);
        }
      }
      for (std::size_t i = 0; i < corpus.size(); ++i) {
        if (members[i].empty()) {
          ++skipped;
          continue;
        }
        estimates.push_back({corpus[i].id, Method::kLevel, level_map(ensemble_mean(members[i])), std::nullopt});
      }
      snapshot["probs"] = s.probs;
      break;
    }
    case Method::kRc: {
      if (s.probs.size() != 1) throw Error(ErrorCode::kMissingProbs, "method rc needs exactly one --probs file");
      Corpus attached = attach_probs(corpus, s.probs.front(), ProbKind::kAnswer);
      for (const auto& q : attached.questions()) {
        if (!q.answer_probs) {
          ++skipped;
          continue;
        }
        estimates.push_back({q.id, Method::kRc, rc_complement(*q.answer_probs, q.correct_index), std::nullopt});
      }
      snapshot["probs"] = s.probs;
      break;
    }
    case Method::kHuman: {
      for (const auto& q : corpus.questions()) {
        if (!q.human_dist) {
          ++skipped;
          continue;
        }
        estimates.push_back({q.id, Method::kHuman, 1.0 - (*q.human_dist)[q.correct_index], std::nullopt});
      }
      break;
    }
    case Method::kAbsolute:
    case Method::kComparative: {
      auto judge = make_judge(s);
      RunConfig cfg = run_config(s);
      snapshot["k"] = cfg.k;
      snapshot["draws"] = cfg.draws;
      snapshot["position_policy"] = std::string(to_string(cfg.position_policy));
      snapshot.update(judge_snapshot(s));
      if (*method == Method::kAbsolute) {
        auto run = run_absolute(corpus, *judge, cfg);
        estimates = flatten(run.draws);
        if (run.dropped_samples) err << "warning: " << run.dropped_samples << " unparseable absolute samples dropped\n";
      } else {
        try {
          auto run = run_comparative(corpus, *judge, cfg);
          estimates = flatten(run.draws);
          records = std::move(run.records);
        } catch (const JudgeRunError& e) {
          std::ostringstream partial;
          write_records_csv(partial, e.partial_records());
          write_file(dir / (prefix + "_records.partial.csv"), partial.str());
          throw;
        }
      }
      break;
    }
    case Method::kCombined: break;
  }
  if (estimates.empty()) throw Error(ErrorCode::kMissingProbs, "no question had the inputs method " + prefix + " needs");
  if (skipped) err << "note: " << skipped << " question(s) lacked inputs for method " << prefix << " and were skipped\n";

  Manifest manifest("estimate_" + prefix, args, s, snapshot);
  manifest.input("corpus", s.corpus);
  for (const auto& p : s.probs) manifest.input("probs", p);
  manifest.emit(dir, prefix + "_scores.csv", estimates_csv(estimates));
  if (!records.empty()) {
    std::ostringstream rec;
    write_records_csv(rec, records);
    manifest.emit(dir, prefix + "_records.csv", rec.str());
    if (s.dump_raw) {
      std::ostringstream raw;
      write_raw_replies_jsonl(raw, records);
      manifest.emit(dir, prefix + "_raw.jsonl", raw.str());
    }
  }
  manifest.finish(dir);
  out << "wrote " << estimates.size() << " " << prefix << " estimates to " << (dir / (prefix + "_scores.csv")).string()
      << '\n';
  return kExitOk;
}

struct EvalRow {
  std::string method;
  CorrelationResult result;
};

std::vector<ScoreList> draws_of(const std::vector<DifficultyEstimate>& estimates) {
  std::vector<ScoreList> out;
  for (const auto& [draw, ests] : by_draw(estimates)) out.push_back(to_score_list(ests));
  return out;
}

// Pairs draws one-to-one, or broadcasts a single-draw side across the other.
std::vector<ScoreList> combine_draws(const std::vector<DifficultyEstimate>& a, const std::vector<DifficultyEstimate>& b) {
  auto da = by_draw(a);
  auto db = by_draw(b);
  std::vector<std::vector<DifficultyEstimate>> va, vb;
  for (auto& [k, v] : da) va.push_back(std::move(v));
  for (auto& [k, v] : db) vb.push_back(std::move(v));
  if (va.size() != vb.size() && va.size() != 1 && vb.size() != 1) {
    throw Error(ErrorCode::kInvalidArgument, "cannot pair " + std::to_string(va.size()) + " draws with " +
                                                 std::to_string(vb.size()));
  }
  const std::size_t n = std::max(va.size(), vb.size());
  std::vector<ScoreList> out;
  for (std::size_t d = 0; d < n; ++d) {
    const auto& x = va[va.size() == 1 ? 0 : d];
    const auto& y = vb[vb.size() == 1 ? 0 : d];
    out.push_back(to_score_list(combine(x, y)));
  }
  return out;
}

std::vector<ScoreList> restrict_to(const std::vector<ScoreList>& draws, const std::set<std::string>& ids) {
  std::vector<ScoreList> out;
  for (const auto& d : draws) {
    ScoreList kept;
    for (const auto& s : d) {
      if (ids.count(s.id)) kept.push_back(s);
    }
    out.push_back(std::move(kept));
  }
  return out;
}

int cmd_eval(const Settings& s, const std::vector<std::string>& args, std::ostream& out) {
  if (s.scores.empty()) throw Error(ErrorCode::kInvalidArgument, "eval needs at least one --scores file");
  Corpus corpus = load_corpus(s.gold);
  ScoreList gold = gold_scores(corpus);

  std::vector<std::pair<std::string, std::vector<DifficultyEstimate>>> methods;
  for (const auto& path : s.scores) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
    std::map<std::string, std::vector<DifficultyEstimate>> grouped;
    for (auto& e : read_estimates_csv(in)) grouped[std::string(to_string(e.method))].push_back(std::move(e));
    for (auto& [m, ests] : grouped) methods.emplace_back(m, std::move(ests));
  }

  std::vector<std::pair<std::string, std::vector<ScoreList>>> sets;
  for (const auto& [m, ests] : methods) sets.emplace_back(m, draws_of(ests));
  if (s.combine) {
    if (methods.size() != 2) {
      throw Error(ErrorCode::kInvalidArgument, "--combine needs exactly two score sets, got " + std::to_string(methods.size()));
    }
    sets.emplace_back("combined", combine_draws(methods[0].second, methods[1].second));
  }

  std::vector<EvalRow> rows;
  for (const auto& [m, draws] : sets) rows.push_back({m, spearman_over_draws(draws, gold)});
  if (s.group_by_grade) {
    for (const auto& [grade, part] : split_by_grade(corpus)) {
      std::set<std::string> ids;
      for (const auto& q : part.questions()) ids.insert(q.id);
      for (const auto& [m, draws] : sets) {
        auto sub = restrict_to(draws, ids);
        if (sub.front().size() < 2) continue;
        rows.push_back({m + "@" + grade, spearman_over_draws(sub, gold)});
      }
    }
  }

  std::ostringstream csv_out;
  csv_out << "method,n,mean_rho,std_rho\n";
  out << std::left << std::setw(20) << "method" << std::right << std::setw(6) << "n" << "  Spearman\n";
  for (const auto& r : rows) {
    csv_out << csv::join_row({r.method, std::to_string(r.result.n), csv::format_double(*r.result.mean_rho),
                              r.result.std_rho ? csv::format_double(*r.result.std_rho) : std::string()})
            << '\n';
    out << std::left << std::setw(20) << r.method << std::right << std::setw(6) << r.result.n << "  "
        << percent(*r.result.mean_rho);
    if (r.result.std_rho) out << " \xC2\xB1 " << percent(*r.result.std_rho);
    out << '\n';
  }

  json snapshot = {{"gold", s.gold}, {"scores", s.scores}, {"combine", s.combine}, {"group_by_grade", s.group_by_grade}};
  Manifest manifest("eval", args, s, snapshot);
  manifest.input("gold", s.gold);
  for (const auto& p : s.scores) manifest.input("scores", p);
  manifest.emit(s.out_dir, "eval.csv", csv_out.str());
  manifest.finish(s.out_dir);
  return kExitOk;
}

int cmd_curve(const Settings& s, const std::vector<std::string>& args, std::ostream& out) {
  if (s.k_list.empty()) throw Error(ErrorCode::kInvalidArgument, "curve needs --k-list");
  if (s.curve_method != "comparative" && s.curve_method != "absolute" && s.curve_method != "both") {
    throw Error(ErrorCode::kInvalidArgument, "--method must be comparative, absolute or both");
  }
  Corpus corpus = load_corpus(s.corpus);
  ScoreList gold = gold_scores(corpus);
  auto judge = make_judge(s);
  std::set<int> ks(s.k_list.begin(), s.k_list.end());

  json snapshot = {{"corpus", s.corpus}, {"k_list", std::vector<int>(ks.begin(), ks.end())},
                   {"draws", s.draws}, {"position_policy", s.position_policy}};
  snapshot.update(judge_snapshot(s));
  Manifest manifest("curve", args, s, snapshot);
  manifest.input("corpus", s.corpus);

  std::vector<std::string> methods;
  if (s.curve_method != "absolute") methods.push_back("comparative");
  if (s.curve_method != "comparative") methods.push_back("absolute");
  for (const auto& m : methods) {
    std::map<int, std::vector<ScoreList>> by_k;
    for (int k : ks) {
      Settings sk = s;
      sk.k = k;
      RunConfig cfg = run_config(sk);
      auto draws = m == "comparative" ? run_comparative(corpus, *judge, cfg).draws : run_absolute(corpus, *judge, cfg).draws;
      std::vector<ScoreList> lists;
      for (const auto& d : draws) lists.push_back(to_score_list(d));
      by_k.emplace(k, std::move(lists));
    }
    std::ostringstream csv_out;
    csv_out << "K,mean_rho,std_rho\n";
    out << m << "\n  " << std::setw(6) << "K" << "  Spearman\n";
    for (const auto& row : correlation_curve(by_k, gold)) {
      csv_out << row.k << ',' << csv::format_double(row.mean_rho) << ',' << csv::format_double(row.std_rho) << '\n';
      out << "  " << std::setw(6) << row.k << "  " << percent(row.mean_rho) << " \xC2\xB1 " << percent(row.std_rho) << '\n';
    }
    manifest.emit(s.out_dir, "curve_" + m + ".csv", csv_out.str());
  }
  manifest.finish(s.out_dir);
  return kExitOk;
}

int cmd_bias(const Settings& s, const std::vector<std::string>& args, std::ostream& out) {
  Corpus corpus = load_corpus(s.corpus);
  auto judge = make_judge(s);
  Rng stream = Rng::derive(s.seed, "bias/pairs");
  BiasReport r = measure_position_bias(corpus, *judge, s.n_pairs, stream);

  out << "pairs               " << r.n_pairs << '\n'
      << "judgments           " << r.judgments << " (" << r.unparsed << " unparsed)\n"
      << "first-pick rate     " << percent(r.first_pick_rate) << "%\n"
      << "first-pick excess   " << percent(r.first_pick_excess) << "%\n"
      << "inconsistency rate  " << percent(r.inconsistency_rate) << "%\n";

  json report = {{"n_pairs", r.n_pairs},
                 {"judgments", r.judgments},
                 {"unparsed", r.unparsed},
                 {"first_pick_rate", r.first_pick_rate},
                 {"first_pick_excess", r.first_pick_excess},
                 {"inconsistency_rate", r.inconsistency_rate}};
  json snapshot = {{"corpus", s.corpus}, {"n_pairs", s.n_pairs}};
  snapshot.update(judge_snapshot(s));
  Manifest manifest("bias", args, s, snapshot);
  manifest.input("corpus", s.corpus);
  manifest.emit(s.out_dir, "bias.json", report.dump(2) + "\n");
  manifest.finish(s.out_dir);
  return kExitOk;
}

int cmd_simulate(const Settings& s, const std::vector<std::string>& args, std::ostream& out) {
  SyntheticSpec spec;
  if (!s.spec.empty()) {
    spec = parse_synthetic_spec(read_file(s.spec));
  } else if (s.preset == "cmcqrd") {
    spec = cmcqrd_like_spec();
  } else {
    throw Error(ErrorCode::kInvalidSpec, "simulate needs --spec FILE or --preset cmcqrd");
  }
  Corpus corpus = make_synthetic_corpus(spec, s.seed);
  std::ostringstream jsonl;
  write_corpus(jsonl, corpus);

  fs::path target = s.out.empty() ? fs::path(s.out_dir) / "synthetic.jsonl" : fs::path(s.out);
  fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  json snapshot = {{"spec", s.spec}, {"preset", s.preset}};
  Manifest manifest("simulate", args, s, snapshot);
  if (!s.spec.empty()) manifest.input("spec", s.spec);
  manifest.emit(dir, target.filename().string(), jsonl.str());
  manifest.finish(dir);
  out << "wrote " << corpus.size() << " questions to " << target.string() << '\n';
  return kExitOk;
}

void add_shared(CLI::App* app, Bindings& b, Settings& s) {
  bind_option(app, b, "--seed", s.seed, "seed", "Root seed for every random stream");
  app->add_option("--config", s.config, "JSON config file (flags override it)");
  bind_option(app, b, "--out-dir", s.out_dir, "out_dir", "Directory for outputs");
  bind_option(app, b, "--parallelism", s.parallelism, "parallelism", "Concurrent judge calls")->check(CLI::PositiveNumber);
}

void add_judge(CLI::App* app, Bindings& b, Settings& s) {
  bind_option(app, b, "--judge", s.judge, "judge", "Judge backend")->check(CLI::IsMember({"remote", "sim"}));
  bind_option(app, b, "--sim-beta", s.sim_beta, "sim_beta", "Simulated comparison discrimination");
  bind_option(app, b, "--sim-epsilon", s.sim_epsilon, "sim_epsilon", "Simulated first-position bias weight");
  bind_option(app, b, "--sim-sigma", s.sim_sigma, "sim_sigma", "Simulated absolute-score noise");
  bind_option(app, b, "--sim-scale-lo", s.sim_scale_lo, "sim_scale_lo", "Latent value mapped to score 1");
  bind_option(app, b, "--sim-scale-hi", s.sim_scale_hi, "sim_scale_hi", "Latent value mapped to score 10");
  bind_option(app, b, "--base-url", s.base_url, "base_url", "Chat-completion endpoint base URL");
  bind_option(app, b, "--model", s.model, "model", "Remote model name");
  bind_option(app, b, "--temperature", s.temperature, "temperature", "Sampling temperature");
  bind_option(app, b, "--max-tokens", s.max_tokens, "max_tokens", "Max output tokens per reply");
  bind_option(app, b, "--max-retries", s.max_retries, "max_retries", "Retries for transient failures and unparsed replies");
  bind_option(app, b, "--timeout", s.timeout, "timeout", "Per-request timeout in seconds");
}

void add_run(CLI::App* app, Bindings& b, Settings& s) {
  bind_option(app, b, "--draws", s.draws, "draws", "Independent repetitions")->check(CLI::PositiveNumber);
  bind_option(app, b, "--position-policy", s.position_policy, "position_policy", "Slot the target occupies")
      ->check(CLI::IsMember({"target-first", "target-second", "random", "balanced"}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Settings s;
  std::map<CLI::App*, Bindings> bindings;

  CLI::App app{"Rank multiple-choice questions by difficulty and evaluate the rankings", "qdrank"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  auto* validate = app.add_subcommand("validate", "Validate a corpus and print coverage per grade");
  validate->add_option("corpus", s.corpus, "Corpus JSONL")->required();
  add_shared(validate, bindings[validate], s);

  auto* estimate = app.add_subcommand("estimate", "Score every question with one method");
  bind_option(estimate, bindings[estimate], "--corpus", s.corpus, "corpus", "Corpus JSONL")->required();
  bind_option(estimate, bindings[estimate], "--method", s.method, "method", "level|rc|absolute|comparative|human")->required();
  estimate->add_option("--probs", s.probs, "Probability JSONL (repeat for a level ensemble)");
  bind_option(estimate, bindings[estimate], "--k", s.k, "k", "Comparisons or samples per question")->check(CLI::PositiveNumber);
  bind_switch(estimate, bindings[estimate], "--dump-raw", s.dump_raw, "dump_raw", "Write raw judge replies as JSONL");
  add_run(estimate, bindings[estimate], s);
  add_judge(estimate, bindings[estimate], s);
  add_shared(estimate, bindings[estimate], s);

  auto* eval = app.add_subcommand("eval", "Spearman correlation of score files against gold difficulty");
  bind_option(eval, bindings[eval], "--gold", s.gold, "gold", "Corpus JSONL with gold_difficulty")->required();
  eval->add_option("--scores", s.scores, "Estimates CSV (repeatable)")->required();
  bind_switch(eval, bindings[eval], "--combine", s.combine, "combine", "Add a rank-averaged combination of two score sets");
  bind_switch(eval, bindings[eval], "--group-by-grade", s.group_by_grade, "group_by_grade", "Add per-grade rows");
  add_shared(eval, bindings[eval], s);

  auto* curve = app.add_subcommand("curve", "Correlation against K for the zero-shot methods");
  bind_option(curve, bindings[curve], "--corpus", s.corpus, "corpus", "Corpus JSONL")->required();
  bind_option(curve, bindings[curve], "--k-list", s.k_list, "k_list", "Values of K")->delimiter(',');
  bind_option(curve, bindings[curve], "--method", s.curve_method, "method", "comparative|absolute|both");
  add_run(curve, bindings[curve], s);
  add_judge(curve, bindings[curve], s);
  add_shared(curve, bindings[curve], s);

  auto* bias = app.add_subcommand("bias", "Measure position bias by judging pairs in both orders");
  bind_option(bias, bindings[bias], "--corpus", s.corpus, "corpus", "Corpus JSONL")->required();
  bind_option(bias, bindings[bias], "--n-pairs", s.n_pairs, "n_pairs", "Unordered pairs to sample")->check(CLI::PositiveNumber);
  add_judge(bias, bindings[bias], s);
  add_shared(bias, bindings[bias], s);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic corpus from simulated cohorts");
  simulate->add_option("--spec", s.spec, "Synthetic spec JSON");
  simulate->add_option("--preset", s.preset, "Built-in spec")->check(CLI::IsMember({"cmcqrd"}));
  simulate->add_option("--out", s.out, "Output JSONL (default <out-dir>/synthetic.jsonl)");
  add_shared(simulate, bindings[simulate], s);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    if (dynamic_cast<const CLI::CallForHelp*>(&e) == nullptr) err << "error: " << e.what() << '\n';
    if (sub->get_help_ptr() && sub->get_help_ptr()->count()) {
      out << sub->help();
      return kExitOk;
    }
    return kExitInput;
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (!s.config.empty()) apply_config(s.config, bindings[sub], err);
    const std::string name = sub->get_name();
    if (name == "validate") return cmd_validate(s, out);
    if (name == "estimate") return cmd_estimate(s, args, out, err);
    if (name == "eval") return cmd_eval(s, args, out);
    if (name == "curve") return cmd_curve(s, args, out);
    if (name == "bias") return cmd_bias(s, args, out);
    if (name == "simulate") return cmd_simulate(s, args, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_judge_error(e.code()) ? kExitJudge : kExitInput;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  return kExitInput;
}

}  // namespace qdrank::cli
