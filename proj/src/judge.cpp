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

#include "qdrank/judge.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>

#include "prompt_templates.hpp"
#include "qdrank/error.hpp"

namespace qdrank {

namespace {

constexpr std::size_t kMaxRenderedOptions = 4;

std::string option_block(const Question& q) {
  if (q.options.size() > kMaxRenderedOptions) {
    throw Error(ErrorCode::kTooManyOptions, "question '" + q.id + "' has " +
                                                std::to_string(q.options.size()) +
                                                " options; prompts label at most A-D");
  }
  std::string out;
  for (std::size_t i = 0; i < q.options.size(); ++i) {
    if (i) out += '\n';
    out += static_cast<char>('A' + i);
    out += ") ";
    out += q.options[i];
  }
  return out;
}

// Single left-to-right pass so placeholder-like text inside substituted
// values is never expanded again.
std::string fill(std::string_view tpl, const std::map<std::string, std::string, std::less<>>& values) {
  std::string out;
  out.reserve(tpl.size() + 256);
  std::size_t i = 0;
  while (i < tpl.size()) {
    if (tpl[i] == '{') {
      auto close = tpl.find('}', i);
      if (close != std::string_view::npos) {
        auto it = values.find(tpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tpl[i++];
  }
  return out;
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Calls f(token) for each maximal digit run until it returns true.
template <typename F>
bool scan_digit_runs(std::string_view text, F&& f) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_digit(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_digit(text[j])) ++j;
    if (f(text.substr(i, j - i))) return true;
    i = j;
  }
  return false;
}

}  // namespace

void validate(const JudgeConfig& cfg) {
  if (cfg.backend == Backend::kRemote) {
    if (cfg.base_url.empty()) throw Error(ErrorCode::kJudgeConfig, "remote judge needs base_url");
    if (cfg.model.empty()) throw Error(ErrorCode::kJudgeConfig, "remote judge needs a model name");
  }
  if (!(cfg.temperature >= 0.0)) throw Error(ErrorCode::kJudgeConfig, "temperature must be >= 0");
  if (cfg.max_output_tokens < 1) throw Error(ErrorCode::kJudgeConfig, "max_output_tokens must be >= 1");
  if (cfg.max_retries < 0) throw Error(ErrorCode::kJudgeConfig, "max_retries must be >= 0");
  if (cfg.parallelism < 1) throw Error(ErrorCode::kJudgeConfig, "parallelism must be >= 1");
  if (!(cfg.timeout_seconds > 0.0)) throw Error(ErrorCode::kJudgeConfig, "timeout must be positive");
}

void validate(const SimJudgeParams& p) {
  if (!(p.beta > 0.0)) throw Error(ErrorCode::kJudgeConfig, "sim beta must be > 0");
  if (!(p.epsilon >= 0.0 && p.epsilon <= 1.0)) throw Error(ErrorCode::kJudgeConfig, "sim epsilon must be in [0, 1]");
  if (!(p.sigma_abs >= 0.0)) throw Error(ErrorCode::kJudgeConfig, "sim sigma must be >= 0");
  if (!(p.scale_lo < p.scale_hi)) throw Error(ErrorCode::kJudgeConfig, "sim scale_lo must be < scale_hi");
}

std::string_view absolute_template() { return prompt_templates::kAbsoluteV1; }
std::string_view comparative_template() { return prompt_templates::kComparativeV1; }

std::string render_absolute_prompt(const Question& q) {
  return fill(absolute_template(), {{"context", q.context}, {"question", q.question}, {"options", option_block(q)}});
}

std::string render_comparative_prompt(const Question& first, const Question& second) {
  return fill(comparative_template(), {{"context_1", first.context},
                                       {"question_1", first.question},
                                       {"options_1", option_block(first)},
                                       {"context_2", second.context},
                                       {"question_2", second.question},
                                       {"options_2", option_block(second)}});
}

std::optional<int> try_parse_absolute(std::string_view reply) {
  std::optional<int> found;
  scan_digit_runs(reply, [&](std::string_view tok) {
    auto first_nonzero = tok.find_first_not_of('0');
    if (first_nonzero == std::string_view::npos) return false;
    tok.remove_prefix(first_nonzero);
    if (tok.size() > 2) return false;
    int v = std::stoi(std::string(tok));
    if (v >= 1 && v <= 10) {
      found = v;
      return true;
    }
    return false;
  });
  return found;
}

int parse_absolute(std::string_view reply) {
  auto v = try_parse_absolute(reply);
  if (!v) throw Error(ErrorCode::kUnparseable, "no score in [1, 10] in reply '" + std::string(reply) + "'");
  return *v;
}

Verdict parse_comparative(std::string_view reply) {
  Verdict v{VerdictValue::kUnparsed, std::string(reply)};
  scan_digit_runs(reply, [&](std::string_view tok) {
    if (tok == "1") v.value = VerdictValue::kFirst;
    if (tok == "2") v.value = VerdictValue::kSecond;
    return v.value != VerdictValue::kUnparsed;
  });
  return v;
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

int sim_absolute(double latent_z, const SimJudgeParams& params, Rng& stream) {
  double mapped = 1.0 + 9.0 * (latent_z - params.scale_lo) / (params.scale_hi - params.scale_lo);
  double noisy = mapped + stream.normal(0.0, params.sigma_abs);
  double rounded = std::floor(noisy + 0.5);  // half-up
  return static_cast<int>(std::clamp(rounded, 1.0, 10.0));
}

Verdict sim_compare(double z_first, double z_second, const SimJudgeParams& params, Rng& stream) {
  // Both uniforms are always drawn so the stream layout does not depend on epsilon.
  double u_bias = stream.uniform();
  double u_pick = stream.uniform();
  bool first = u_bias < params.epsilon || u_pick < logistic(params.beta * (z_first - z_second));
  return first ? Verdict{VerdictValue::kFirst, "1"} : Verdict{VerdictValue::kSecond, "2"};
}

namespace {

double latent_of(const Question& q) {
  if (!q.gold_difficulty) {
    throw Error(ErrorCode::kJudgeConfig,
                "simulated judge needs gold_difficulty as the latent for '" + q.id + "'");
  }
  return *q.gold_difficulty;
}

}  // namespace

SimulatedJudge::SimulatedJudge(SimJudgeParams params, int parallelism)
    : params_(params), parallelism_(parallelism) {
  validate(params_);
  if (parallelism_ < 1) throw Error(ErrorCode::kJudgeConfig, "parallelism must be >= 1");
}

std::string SimulatedJudge::absolute(const Question& q, const CallKey& key) const {
  Rng stream = Rng::derive(params_.seed, "judge/absolute", key.target_id, key.draw, key.slot, key.attempt);
  return std::to_string(sim_absolute(latent_of(q), params_, stream));
}

std::string SimulatedJudge::compare(const Question& first, const Question& second, const CallKey& key) const {
  Rng stream = Rng::derive(params_.seed, "judge/compare", key.target_id, key.opponent_id, key.draw,
                           static_cast<int>(key.order), key.attempt);
  return sim_compare(latent_of(first), latent_of(second), params_, stream).raw;
}

RemoteJudge::RemoteJudge(JudgeConfig cfg, std::string api_key) : cfg_(std::move(cfg)), api_key_(std::move(api_key)) {
  cfg_.backend = Backend::kRemote;
  validate(cfg_);
  if (api_key_.empty()) throw Error(ErrorCode::kJudgeConfig, "empty API key");
}

RemoteJudge::RemoteJudge(JudgeConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.backend = Backend::kRemote;
  validate(cfg_);
  const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kJudgeConfig, "environment variable " + std::string(kApiKeyEnv) + " is not set");
  }
  api_key_ = key;
}

std::string RemoteJudge::absolute(const Question& q, const CallKey&) const {
  return remote_complete(cfg_, render_absolute_prompt(q), api_key_);
}

std::string RemoteJudge::compare(const Question& first, const Question& second, const CallKey&) const {
  return remote_complete(cfg_, render_comparative_prompt(first, second), api_key_);
}

}  // namespace qdrank
