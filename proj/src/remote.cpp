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

// OpenAI-compatible chat-completion client used by the remote judge.

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <thread>

#include "json.hpp"
#include "qdrank/error.hpp"
#include "qdrank/judge.hpp"

namespace qdrank {

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix + /chat/completions
};

Endpoint split_base_url(const std::string& base_url) {
  auto scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kJudgeConfig, "base_url must include a scheme: '" + base_url + "'");
  }
  auto path_start = base_url.find('/', scheme_end + 3);
  Endpoint ep;
  ep.origin = base_url.substr(0, path_start);
  std::string prefix = path_start == std::string::npos ? "" : base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  ep.path = prefix + "/chat/completions";
  return ep;
}

// Transient failures are retried; everything else is raised immediately.
struct Attempt {
  bool transient = false;
  std::string text;
  std::string failure;
};

Attempt try_once(httplib::Client& client, const Endpoint& ep, const std::string& body) {
  auto res = client.Post(ep.path, body, "application/json");
  if (!res) {
    return {true, {}, "request failed: " + httplib::to_string(res.error())};
  }
  const int status = res->status;
  if (status == 401 || status == 403) {
    throw Error(ErrorCode::kAuth, "endpoint rejected credentials (HTTP " + std::to_string(status) + ")");
  }
  if (status == 408 || status == 429 || status >= 500) {
    return {true, {}, "HTTP " + std::to_string(status)};
  }
  if (status != 200) {
    throw Error(ErrorCode::kJudgeFailure, "HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200));
  }
  try {
    auto reply = nlohmann::json::parse(res->body);
    const auto& content = reply.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw Error(ErrorCode::kMalformedResponse, "message content is not a string");
    return {false, content.get<std::string>(), {}};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedResponse, std::string("unexpected reply shape: ") + e.what());
  }
}

}  // namespace

std::string remote_complete(const JudgeConfig& cfg, std::string_view prompt, std::string_view api_key) {
  validate(cfg);
  if (cfg.backend != Backend::kRemote) throw Error(ErrorCode::kJudgeConfig, "judge backend is not remote");
  if (api_key.empty()) throw Error(ErrorCode::kJudgeConfig, "empty API key");

  const Endpoint ep = split_base_url(cfg.base_url);
  nlohmann::json body = {
      {"model", cfg.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", cfg.temperature},
      {"max_tokens", cfg.max_output_tokens},
  };
  const std::string payload = body.dump();

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(cfg.timeout_seconds));
  std::string last_failure;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) {
      auto delay_ms = static_cast<long long>(cfg.initial_backoff_ms) << std::min(attempt - 1, 16);
      std::this_thread::sleep_for(std::chrono::milliseconds(std::min(delay_ms, 30'000LL)));
    }
    httplib::Client client(ep.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    client.set_bearer_token_auth(std::string(api_key));
    Attempt a = try_once(client, ep, payload);
    if (!a.transient) return a.text;
    last_failure = a.failure;
  }
  throw Error(ErrorCode::kNetwork, last_failure + " (after " + std::to_string(cfg.max_retries) + " retries)");
}

std::string remote_complete(const JudgeConfig& cfg, std::string_view prompt) {
  const char* key = std::getenv(std::string(kApiKeyEnv).c_str());
  if (key == nullptr || *key == '\0') {
    throw Error(ErrorCode::kJudgeConfig, "environment variable " + std::string(kApiKeyEnv) + " is not set");
  }
  return remote_complete(cfg, prompt, key);
}

}  // namespace qdrank
