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

#include "tirforge/mock_teacher.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"
#include "tirforge/error.hpp"
#include "tirforge/teacher_client.hpp"

namespace tirforge {

using json = nlohmann::json;

std::vector<Fixture> load_fixtures(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<Fixture> out;
  for (const auto& f : files) {
    std::ifstream in(f, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    json j = json::parse(ss.str(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw FormatError("fixture is not a JSON object: " + f.string());
    try {
      Fixture fx;
      fx.match_key = j.at("id").get<std::string>();
      fx.statement = j.at("statement").get<std::string>();
      const auto& body = j.at("body");
      fx.body = body.is_string() ? body.get<std::string>() : body.dump();
      if (j.contains("judge_reply")) fx.judge_reply = j["judge_reply"].get<std::string>();
      if (j.contains("student_reply")) fx.student_reply = j["student_reply"].get<std::string>();
      if (j.contains("fail_script")) fx.fail_script = j["fail_script"].get<std::vector<int>>();
      out.push_back(std::move(fx));
    } catch (const json::exception& e) {
      throw FormatError("fixture " + f.string() + ": " + e.what());
    }
  }
  return out;
}

MockTeacherServer::MockTeacherServer(std::vector<Fixture> fixtures, MockServerOptions options)
    : options_(std::move(options)) {
  entries_.reserve(fixtures.size());
  for (auto& f : fixtures) entries_.push_back({std::move(f), 0});
}

MockTeacherServer::~MockTeacherServer() { stop(); }

MockTeacherServer::Entry* MockTeacherServer::match(const std::string& prompt) {
  if (auto stmt = embedded_statement(prompt)) {
    for (auto& e : entries_) {
      if (e.fixture.statement == *stmt) return &e;
    }
  }
  // Fall back to the longest fixture statement that occurs in the prompt.
  Entry* best = nullptr;
  for (auto& e : entries_) {
    if (!e.fixture.statement.empty() && prompt.find(e.fixture.statement) != std::string::npos &&
        (!best || e.fixture.statement.size() > best->fixture.statement.size())) {
      best = &e;
    }
  }
  return best;
}

namespace {

json completion_body(const std::string& content, const std::string& model, std::size_t n) {
  return {{"id", "mock-" + std::to_string(n)},
          {"object", "chat.completion"},
          {"model", model},
          {"choices",
           json::array({{{"index", 0},
                         {"message", {{"role", "assistant"}, {"content", content}}},
                         {"finish_reason", "stop"}}})}};
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", {{"message", message}, {"code", status}}}}.dump(),
                  "application/json");
}

}  // namespace

void MockTeacherServer::install_routes() {
  server_->Post(R"(.*/chat/completions)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
    std::size_t now = in_flight_.fetch_add(1) + 1;
    std::size_t seen = peak_.load();
    while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
    }
    struct Leave {
      std::atomic<std::size_t>& c;
      ~Leave() { c.fetch_sub(1); }
    } leave{in_flight_};
    std::size_t n = requests_.fetch_add(1) + 1;
    if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);

    if (!options_.required_key.empty() &&
        req.get_header_value("Authorization") != "Bearer " + options_.required_key) {
      send_error(res, 401, "invalid API key");
      return;
    }
    json body = json::parse(req.body, nullptr, false);
    std::string prompt;
    std::string model = "mock";
    try {
      for (const auto& m : body.at("messages")) {
        if (m.at("role") == "user") prompt = m.at("content").get<std::string>();
      }
      if (body.contains("model")) model = body["model"].get<std::string>();
    } catch (const json::exception&) {
      send_error(res, 400, "request body lacks messages[].content");
      return;
    }

    Entry* e = match(prompt);
    if (!e) {
      send_error(res, 404, "no fixture matches prompt starting with: " + prompt.substr(0, 120));
      return;
    }
    {
      std::lock_guard lock(script_mu_);
      std::size_t k = e->attempts++;
      if (k < e->fixture.fail_script.size()) {
        send_error(res, e->fixture.fail_script[k], "scripted failure for " + e->fixture.match_key);
        return;
      }
    }

    const std::string* reply = &e->fixture.body;
    if (is_judge_prompt(prompt)) {
      if (!e->fixture.judge_reply) {
        send_error(res, 404, "fixture " + e->fixture.match_key + " has no judge reply");
        return;
      }
      reply = &*e->fixture.judge_reply;
    } else if (auto stmt = embedded_statement(prompt);
               stmt && prompt == build_student_prompt(*stmt)) {
      if (!e->fixture.student_reply) {
        send_error(res, 404, "fixture " + e->fixture.match_key + " has no student reply");
        return;
      }
      reply = &*e->fixture.student_reply;
    }
    res.status = 200;
    res.set_content(completion_body(*reply, model, n).dump(), "application/json");
  });
}

int MockTeacherServer::start(int port) {
  if (server_) throw Error("mock server already started");
  server_ = std::make_unique<httplib::Server>();
  const std::size_t threads = std::max<std::size_t>(1, options_.threads);
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  server_->set_keep_alive_max_count(1);
  install_routes();
  if (port == 0) {
    port_ = server_->bind_to_any_port(options_.host);
  } else {
    port_ = server_->bind_to_port(options_.host, port) ? port : -1;
  }
  if (port_ <= 0) {
    server_.reset();
    throw Error("mock server cannot bind " + options_.host + ":" + std::to_string(port));
  }
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void MockTeacherServer::stop() {
  if (!server_) return;
  server_->stop();
  if (thread_.joinable()) thread_.join();
  server_.reset();
}

void MockTeacherServer::wait() {
  if (thread_.joinable()) thread_.join();
}

std::string MockTeacherServer::base_url() const {
  return "http://" + options_.host + ":" + std::to_string(port_) + "/v1";
}

void MockTeacherServer::reset_counters() {
  peak_.store(0);
  requests_.store(0);
  std::lock_guard lock(script_mu_);
  for (auto& e : entries_) e.attempts = 0;
}

}  // namespace tirforge
