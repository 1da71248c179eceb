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

#include "tirforge/teacher_client.hpp"

#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "tirforge/error.hpp"
#include "tirforge/hash.hpp"
#include "tirforge/prompts.hpp"

namespace tirforge {

using json = nlohmann::json;

std::chrono::milliseconds BackoffPolicy::delay_for(int retry) const {
  if (retry <= 0) return std::chrono::milliseconds(0);
  double ms = static_cast<double>(initial.count()) * std::pow(multiplier, retry - 1);
  if (!std::isfinite(ms) || ms > static_cast<double>(maximum.count())) return maximum;
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

std::optional<ParsedUrl> parse_base_url(std::string_view url) {
  static const std::regex kUrl(R"(^(https?)://([^/:]+|\[[0-9a-fA-F:.]+\])(?::(\d{1,5}))?(/.*)?$)");
  std::string s(url);
  std::smatch m;
  if (!std::regex_match(s, m, kUrl)) return std::nullopt;
  ParsedUrl out;
  out.scheme = m[1].str();
  out.host = m[2].str();
  out.port = m[3].matched ? std::stoi(m[3].str()) : (out.scheme == "https" ? 443 : 80);
  if (out.port <= 0 || out.port > 65535) return std::nullopt;
  out.path_prefix = m[4].matched ? m[4].str() : "";
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  return out;
}

void EndpointConfig::validate() const {
  if (!parse_base_url(base_url)) throw PreconditionError("base_url does not parse: " + base_url);
  if (model_name.empty()) throw PreconditionError("model name is empty");
  if (max_concurrency < 1) throw PreconditionError("max_concurrency must be >= 1");
  if (!(timeout_s > 0.0)) throw PreconditionError("timeout_s must be > 0");
  if (max_retries < 0) throw PreconditionError("max_retries must be >= 0");
  if (!(temperature >= 0.0)) throw PreconditionError("temperature must be >= 0");
}

// --- cache -----------------------------------------------------------------

namespace {

std::string utc_now_iso() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

CacheStore::CacheStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::string CacheStore::key_for(std::string_view prompt, std::string_view model,
                                double temperature) {
  char temp[32];
  std::snprintf(temp, sizeof temp, "%.17g", temperature);
  std::string material;
  material.reserve(prompt.size() + model.size() + 40);
  material.append(model).push_back('\0');
  material.append(temp).push_back('\0');
  material.append(prompt);
  return sha256_hex(material);
}

std::filesystem::path CacheStore::path_for(const std::string& key) const {
  return dir_ / key.substr(0, 2) / (key + ".json");
}

std::optional<CacheEntry> CacheStore::get(const std::string& key) const {
  std::ifstream in(path_for(key), std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded() || !j.is_object() || j.value("key", "") != key ||
      !j.contains("raw_response") || !j["raw_response"].is_string()) {
    return std::nullopt;
  }
  return CacheEntry{key, j["raw_response"].get<std::string>(), j.value("created_at", "")};
}

void CacheStore::put(const std::string& key, std::string_view raw_response) {
  std::lock_guard lock(write_mu_);
  auto target = path_for(key);
  std::filesystem::create_directories(target.parent_path());
  json j = {{"key", key}, {"raw_response", raw_response}, {"created_at", utc_now_iso()}};
  auto tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << j.dump(2) << '\n';
    if (!out) throw Error("cannot write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, target);
}

// --- wire ------------------------------------------------------------------

std::string ChatCompletionsAdapter::encode(std::string_view model, std::string_view prompt,
                                           double temperature) const {
  json body = {
      {"model", model},
      {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", temperature},
  };
  return body.dump();
}

std::string ChatCompletionsAdapter::decode(std::string_view body) const {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ParseError("endpoint reply is not JSON");
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ParseError("assistant content is not a string");
    return content.get<std::string>();
  } catch (const json::exception&) {
    throw ParseError("endpoint reply has no choices[0].message.content");
  }
}

// --- client ----------------------------------------------------------------

ChatClient::ChatClient(EndpointConfig config, CacheStore* cache,
                       std::shared_ptr<const WireAdapter> adapter)
    : config_(std::move(config)),
      cache_(cache),
      adapter_(adapter ? std::move(adapter) : std::make_shared<ChatCompletionsAdapter>()),
      slots_(std::max(1, config_.max_concurrency)) {
  config_.validate();
  url_ = *parse_base_url(config_.base_url);
}

namespace {

bool retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

struct SlotGuard {
  std::counting_semaphore<>& sem;
  explicit SlotGuard(std::counting_semaphore<>& s) : sem(s) { sem.acquire(); }
  ~SlotGuard() { sem.release(); }
};

}  // namespace

ChatReply ChatClient::complete(std::string_view prompt) {
  const std::string key = CacheStore::key_for(prompt, config_.model_name, config_.temperature);
  if (cache_) {
    if (auto hit = cache_->get(key)) return ChatReply{hit->raw_response, 0, true};
  }
  if (config_.api_key.empty()) {
    throw AuthFailure(std::string("no API key configured; set ") + kApiKeyEnv);
  }

  const std::string body = adapter_->encode(config_.model_name, prompt, config_.temperature);
  const std::string path = url_.path_prefix + adapter_->path();
  const std::string origin = url_.scheme + "://" + url_.host + ":" + std::to_string(url_.port);
  const auto timeout = std::chrono::milliseconds(static_cast<std::int64_t>(config_.timeout_s * 1000));

  int last_status = 0;
  bool reached_server = false;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(config_.backoff.delay_for(attempt));

    int status = 0;
    std::string reply_body;
    httplib::Error transport = httplib::Error::Success;
    {
      SlotGuard slot(slots_);
      httplib::Client cli(origin);
      cli.set_connection_timeout(timeout);
      cli.set_read_timeout(timeout);
      cli.set_write_timeout(timeout);
      cli.set_keep_alive(false);
      httplib::Headers headers{{"Authorization", "Bearer " + config_.api_key}};
      network_calls_.fetch_add(1);
      auto res = cli.Post(path, headers, body, "application/json");
      if (res) {
        status = res->status;
        reply_body = std::move(res->body);
      } else {
        transport = res.error();
      }
    }

    if (status == 0) {
      last_status = 0;
      last_error = httplib::to_string(transport);
      continue;
    }
    reached_server = true;
    last_status = status;
    if (status == 401 || status == 403) {
      throw AuthFailure("endpoint rejected credentials (HTTP " + std::to_string(status) + ")",
                        status);
    }
    if (retryable_status(status)) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status < 200 || status >= 300) {
      throw EndpointError("endpoint returned HTTP " + std::to_string(status) + ": " +
                              reply_body.substr(0, 200),
                          status);
    }
    std::string text = adapter_->decode(reply_body);
    if (cache_) cache_->put(key, text);
    return ChatReply{std::move(text), attempt, false};
  }

  const int attempts = config_.max_retries + 1;
  if (!reached_server) {
    throw EndpointUnreachable("cannot reach " + origin + " after " + std::to_string(attempts) +
                              " attempts: " + last_error);
  }
  throw ExhaustedRetries("gave up after " + std::to_string(attempts) + " attempts (" +
                             last_error + ")",
                         last_status, attempts);
}

// --- prompts ---------------------------------------------------------------

namespace {

std::string fill_slot(std::string_view tmpl, std::string_view statement) {
  auto pos = tmpl.find(assets::kProblemSlot);
  std::string out;
  out.reserve(tmpl.size() + statement.size());
  out.append(tmpl.substr(0, pos));
  out.append(statement);
  out.append(tmpl.substr(pos + assets::kProblemSlot.size()));
  return out;
}

std::optional<std::string> unfill(std::string_view tmpl, std::string_view prompt) {
  auto pos = tmpl.find(assets::kProblemSlot);
  auto prefix = tmpl.substr(0, pos);
  auto suffix = tmpl.substr(pos + assets::kProblemSlot.size());
  if (prompt.size() < prefix.size() + suffix.size() || !prompt.starts_with(prefix) ||
      !prompt.ends_with(suffix)) {
    return std::nullopt;
  }
  return std::string(prompt.substr(prefix.size(), prompt.size() - prefix.size() - suffix.size()));
}

void require_statement(const Problem& problem) {
  if (problem.statement.empty()) {
    throw PreconditionError("problem " + problem.id + " has an empty statement");
  }
}

}  // namespace

std::string build_double_pattern_prompt(const Problem& problem) {
  require_statement(problem);
  return fill_slot(assets::double_pattern_prompt(), problem.statement);
}

std::string build_judge_prompt(const Problem& problem) {
  require_statement(problem);
  return fill_slot(assets::judge_prompt(), problem.statement);
}

std::string build_student_prompt(std::string_view statement) {
  if (statement.empty()) throw PreconditionError("empty problem statement");
  return fill_slot(assets::student_prompt(), statement);
}

std::optional<std::string> embedded_statement(std::string_view prompt) {
  for (auto tmpl : {assets::double_pattern_prompt(), assets::judge_prompt(),
                    assets::student_prompt()}) {
    if (auto s = unfill(tmpl, prompt)) return s;
  }
  return std::nullopt;
}

bool is_judge_prompt(std::string_view prompt) {
  return unfill(assets::judge_prompt(), prompt).has_value();
}

ChatReply request_solution(const Problem& problem, ChatClient& client) {
  return client.complete(build_double_pattern_prompt(problem));
}

PatternLabel extract_judgment(std::string_view reply) {
  std::string text(reply);
  static const std::regex kAfterWord(R"([Pp][Aa][Tt][Tt][Ee][Rr][Nn]\s*[:#\-]?\s*[("'*]*([AB])\b)");
  std::smatch m;
  if (std::regex_search(text, m, kAfterWord)) return m[1].str() == "A" ? PatternLabel::kA : PatternLabel::kB;

  std::string bare;
  for (char c : text) {
    if (!std::isspace(static_cast<unsigned char>(c)) && std::string_view("*.\"'()`").find(c) == std::string_view::npos) {
      bare.push_back(c);
    }
  }
  if (bare == "A") return PatternLabel::kA;
  if (bare == "B") return PatternLabel::kB;

  static const std::regex kJsonField(R"re("chosen_pattern"\s*:\s*"([AB])")re");
  if (std::regex_search(text, m, kJsonField)) return m[1].str() == "A" ? PatternLabel::kA : PatternLabel::kB;
  throw UnparseableJudgment(text);
}

PatternLabel judge_pattern(const Problem& problem, ChatClient& client) {
  return extract_judgment(client.complete(build_judge_prompt(problem)).text);
}

}  // namespace tirforge
