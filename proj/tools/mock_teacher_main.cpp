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

#include <csignal>
#include <iostream>

#include "CLI11.hpp"
#include "tirforge/error.hpp"
#include "tirforge/mock_teacher.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Replays canned teacher replies over the chat-completions wire shape",
               "tirforge-mock-teacher"};
  std::string fixtures;
  int port = 0;
  int latency_ms = 0;
  std::string key;
  app.add_option("--fixtures", fixtures, "fixture directory")->required();
  app.add_option("--port", port, "port to bind (0 picks a free one)");
  app.add_option("--latency-ms", latency_ms, "delay added to every reply");
  app.add_option("--require-key", key, "reject requests without this bearer key");
  CLI11_PARSE(app, argc, argv);

  try {
    tirforge::MockServerOptions opts;
    opts.latency = std::chrono::milliseconds(latency_ms);
    opts.required_key = key;
    tirforge::MockTeacherServer server(tirforge::load_fixtures(fixtures), opts);
    int bound = server.start(port);
    std::cout << server.base_url() << std::endl;
    std::cerr << "serving fixtures on port " << bound << "\n";

    sigset_t set;
    sigemptyset(&set);
    sigaddset(&set, SIGINT);
    sigaddset(&set, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &set, nullptr);
    int sig = 0;
    sigwait(&set, &sig);
    server.stop();
  } catch (const tirforge::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
