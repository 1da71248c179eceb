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
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace tirforge {

// One canned conversation. Requests are matched on the problem statement
// embedded in the prompt, so replies do not depend on arrival order.
struct Fixture {
  std::string match_key;  // problem id, used in diagnostics
  std::string statement;
  std::string body;  // reply to the double-pattern prompt
  std::optional<std::string> judge_reply;
  std::optional<std::string> student_reply;
  std::vector<int> fail_script;  // statuses served before the first success
};

// Reads every *.json file of `dir` in name order. Each file holds one object
// {"id","statement","body",...}; a non-string body is serialized compactly.
// Throws FormatError.
std::vector<Fixture> load_fixtures(const std::filesystem::path& dir);

struct MockServerOptions {
  std::string host = "127.0.0.1";
  std::chrono::milliseconds latency{0};
  // When non-empty, requests without "Authorization: Bearer <key>" get 401.
  std::string required_key;
  std::size_t threads = 64;
};

// Replays fixtures over the chat-completions wire shape. Unmatched prompts
// get HTTP 404 with a diagnostic body.
class MockTeacherServer {
 public:
  explicit MockTeacherServer(std::vector<Fixture> fixtures, MockServerOptions options = {});
  ~MockTeacherServer();
  MockTeacherServer(const MockTeacherServer&) = delete;
  MockTeacherServer& operator=(const MockTeacherServer&) = delete;

  // Binds (port 0 picks a free one), starts serving on a background thread
  // and returns the bound port. Throws Error when binding fails.
  int start(int port = 0);
  void stop();
  // Blocks the calling thread until stop() is called from elsewhere.
  void wait();

  std::string base_url() const;
  int port() const noexcept { return port_; }
  std::size_t peak_in_flight() const noexcept { return peak_.load(); }
  std::size_t requests_served() const noexcept { return requests_.load(); }
  void reset_counters();

 private:
  struct Entry {
    Fixture fixture;
    std::size_t attempts = 0;
  };

  void install_routes();
  Entry* match(const std::string& prompt);

  std::vector<Entry> entries_;
  MockServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::mutex script_mu_;
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_{0};
  std::atomic<std::size_t> requests_{0};
  int port_ = 0;
};

}  // namespace tirforge
