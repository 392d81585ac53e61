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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "qdrank/comparison.hpp"
#include "qdrank/corpus.hpp"
#include "qdrank/rng.hpp"

namespace qdrank {

inline constexpr std::string_view kApiKeyEnv = "QDRANK_API_KEY";
inline constexpr std::string_view kPromptTemplateVersion = "v1";

enum class Backend { kRemote, kSimulated };

struct JudgeConfig {
  Backend backend = Backend::kSimulated;
  std::string base_url;
  std::string model;
  double temperature = 1.0;
  int max_output_tokens = 16;
  int max_retries = 3;
  int parallelism = 1;
  double timeout_seconds = 60.0;
  int initial_backoff_ms = 500;
};

// Throws judge-config-error when the config cannot be used as given.
void validate(const JudgeConfig& cfg);

// Knobs of the simulated judge. Latent difficulties are mapped affinely from
// [scale_lo, scale_hi] onto the 1..10 absolute scale.
struct SimJudgeParams {
  double beta = 1.5;       // comparison discrimination
  double epsilon = 0.0;    // probability of answering "first" regardless of content
  double sigma_abs = 1.0;  // absolute-score noise, in scale points
  double scale_lo = -5.0;
  double scale_hi = 5.0;
  std::uint64_t seed = 0;
};

void validate(const SimJudgeParams& params);

// Prompt templates, frozen per version.
std::string_view absolute_template();
std::string_view comparative_template();

std::string render_absolute_prompt(const Question& q);
std::string render_comparative_prompt(const Question& first, const Question& second);

// First standalone integer token in [1, 10]; tokens are maximal digit runs,
// so "10" is never read as "1".
std::optional<int> try_parse_absolute(std::string_view reply);
int parse_absolute(std::string_view reply);

// First standalone "1" or "2". Never throws.
Verdict parse_comparative(std::string_view reply);

// One chat completion. The key is read from QDRANK_API_KEY unless given.
std::string remote_complete(const JudgeConfig& cfg, std::string_view prompt);
std::string remote_complete(const JudgeConfig& cfg, std::string_view prompt, std::string_view api_key);

int sim_absolute(double latent_z, const SimJudgeParams& params, Rng& stream);
Verdict sim_compare(double z_first, double z_second, const SimJudgeParams& params, Rng& stream);

double logistic(double x);

// Identifies one judge call. Simulated judges derive their random stream from
// it, so a call's answer does not depend on when or where it runs.
struct CallKey {
  std::string_view target_id;
  std::string_view opponent_id;  // empty for absolute calls
  int draw = 0;
  int slot = 0;                  // sample index for absolute calls
  Position order = Position::kFirst;
  int attempt = 0;
};

// Judges return raw reply text; parsing is the caller's job so both backends
// go through the same parse path.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::string absolute(const Question& q, const CallKey& key) const = 0;
  virtual std::string compare(const Question& first, const Question& second, const CallKey& key) const = 0;
  virtual int max_retries() const = 0;
  virtual int parallelism() const = 0;
};

// Uses each question's gold_difficulty as its latent difficulty.
class SimulatedJudge final : public Judge {
 public:
  explicit SimulatedJudge(SimJudgeParams params, int parallelism = 1);

  std::string absolute(const Question& q, const CallKey& key) const override;
  std::string compare(const Question& first, const Question& second, const CallKey& key) const override;
  int max_retries() const override { return 0; }
  int parallelism() const override { return parallelism_; }

  const SimJudgeParams& params() const { return params_; }

 private:
  SimJudgeParams params_;
  int parallelism_;
};

class RemoteJudge final : public Judge {
 public:
  RemoteJudge(JudgeConfig cfg, std::string api_key);
  // Reads the key from the environment.
  explicit RemoteJudge(JudgeConfig cfg);

  std::string absolute(const Question& q, const CallKey& key) const override;
  std::string compare(const Question& first, const Question& second, const CallKey& key) const override;
  int max_retries() const override { return cfg_.max_retries; }
  int parallelism() const override { return cfg_.parallelism; }

 private:
  JudgeConfig cfg_;
  std::string api_key_;
};

}  // namespace qdrank
