// Copyright 2026 The tirforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>

#include "tirforge/schema.hpp"

namespace tirforge {

// Exponential backoff: the k-th retry (k >= 1) waits
// min(maximum, initial * multiplier^(k-1)). Delays never decrease.
struct BackoffPolicy {
  std::chrono::milliseconds initial{500};
  std::chrono::milliseconds maximum{30000};
  double multiplier = 2.0;

  std::chrono::milliseconds delay_for(int retry) const;
};

struct EndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name = "teacher";
  std::string api_key;
  int max_concurrency = 4;
  double timeout_s = 60.0;
  int max_retries = 3;
  double temperature = 0.0;
  BackoffPolicy backoff;

  // Throws PreconditionError when the URL does not parse or a bound is out
  // of range.
  void validate() const;
};

// Name of the environment variable holding the endpoint key.
inline constexpr const char* kApiKeyEnv = "TIRFORGE_API_KEY";

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string path_prefix;  // "" or "/v1" style, no trailing slash
};

std::optional<ParsedUrl> parse_base_url(std::string_view url);

struct CacheEntry {
  std::string key;
  std::string raw_response;
  std::string created_at;  // ISO-8601 UTC
};

// One JSON file per entry at <dir>/<first two hex chars>/<key>.json. Writes
// are serialized and land atomically via rename.
class CacheStore {
 public:
  explicit CacheStore(std::filesystem::path dir);

  static std::string key_for(std::string_view prompt, std::string_view model,
                             double temperature);

  std::optional<CacheEntry> get(const std::string& key) const;
  void put(const std::string& key, std::string_view raw_response);
  std::filesystem::path path_for(const std::string& key) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex write_mu_;
};

// Encodes one single-shot prompt for the wire and decodes the assistant text.
class WireAdapter {
 public:
  virtual ~WireAdapter() = default;
  virtual std::string path() const = 0;
  virtual std::string encode(std::string_view model, std::string_view prompt,
                             double temperature) const = 0;
  // Throws ParseError when the body has no assistant text.
  virtual std::string decode(std::string_view body) const = 0;
};

// POST {base}/chat/completions with {"model","messages","temperature"}; reads
// choices[0].message.content.
class ChatCompletionsAdapter final : public WireAdapter {
 public:
  std::string path() const override { return "/chat/completions"; }
  std::string encode(std::string_view model, std::string_view prompt,
                     double temperature) const override;
  std::string decode(std::string_view body) const override;
};

struct ChatReply {
  std::string text;
  int retries = 0;
  bool cache_hit = false;
};

// Thread-safe. At most max_concurrency requests are in flight at once; a
// request waiting out a backoff delay does not hold a slot.
class ChatClient {
 public:
  explicit ChatClient(EndpointConfig config, CacheStore* cache = nullptr,
                      std::shared_ptr<const WireAdapter> adapter = nullptr);

  // Cache first, then the endpoint. HTTP 429, 5xx, timeouts and connection
  // failures are retried up to max_retries times; 401/403 throw AuthFailure
  // immediately. Exhausting retries throws ExhaustedRetries, or
  // EndpointUnreachable when no attempt reached the server.
  ChatReply complete(std::string_view prompt);

  const EndpointConfig& config() const noexcept { return config_; }
  std::size_t network_calls() const noexcept { return network_calls_.load(); }

 private:
  EndpointConfig config_;
  ParsedUrl url_;
  CacheStore* cache_;
  std::shared_ptr<const WireAdapter> adapter_;
  std::counting_semaphore<> slots_;
  std::atomic<std::size_t> network_calls_{0};
};

// The double-pattern teacher prompt with the statement substituted. Throws
// PreconditionError on an empty statement.
std::string build_double_pattern_prompt(const Problem& problem);

// Reduced prompt that asks only for the A/B pattern decision.
std::string build_judge_prompt(const Problem& problem);

// Student-facing prompt used for training rows and evaluation.
std::string build_student_prompt(std::string_view statement);

// Inverse of the prompt builders: the statement embedded in a prompt produced
// by any of the three templates, if recognizable.
std::optional<std::string> embedded_statement(std::string_view prompt);

bool is_judge_prompt(std::string_view prompt);

ChatReply request_solution(const Problem& problem, ChatClient& client);

// Label extraction: the first A/B after the word "Pattern", else a reply that
// is just the letter, else a "chosen_pattern" JSON field. Throws
// UnparseableJudgment.
PatternLabel extract_judgment(std::string_view reply);

PatternLabel judge_pattern(const Problem& problem, ChatClient& client);

}  // namespace tirforge
