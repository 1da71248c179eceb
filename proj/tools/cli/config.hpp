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

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tirforge/answer_equiv.hpp"
#include "tirforge/dataset_builder.hpp"
#include "tirforge/sandbox.hpp"
#include "tirforge/teacher_client.hpp"

namespace tirforge::cli {

// Recognized setting keys with their defaults. Keys use snake_case in config
// files and TIRFORGE_<UPPER_KEY> in the environment; flags spell them with
// dashes (exec_timeout -> --exec-timeout).
const std::map<std::string, std::string>& setting_defaults();

// Where each resolved value came from, for the startup printout.
enum class Origin { kDefault, kEnv, kFile, kFlag };

struct Setting {
  std::string value;
  Origin origin = Origin::kDefault;
};

using Settings = std::map<std::string, Setting>;
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

// Parses a key = value document. '#' starts a comment, [section] headers are
// ignored, values may be quoted. Unknown keys throw FormatError so typos do
// not pass silently.
std::map<std::string, std::string> parse_config_text(std::string_view text);

// Layers defaults < environment < config file < flags.
Settings resolve_settings(const std::map<std::string, std::string>& flags,
                          const std::optional<std::filesystem::path>& config_file,
                          const EnvLookup& env);

struct RunConfig {
  EndpointConfig endpoint;
  SandboxConfig sandbox;
  ExecLimits limits;
  EquivConfig equiv;
  FilterPolicy filter;
  std::filesystem::path cache_dir;
  bool use_cache = true;
  double split_ratio = 0.9;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 4;
};

// Converts resolved strings into typed config. Throws PreconditionError on a
// value that does not parse or is out of range. The API key is read from the
// environment only.
RunConfig to_run_config(const Settings& settings, const EnvLookup& env);

// One "key = value  (origin)" line per setting; the API key shows only
// whether it is set.
std::string render_settings(const Settings& settings, const EnvLookup& env);

EnvLookup process_env();

}  // namespace tirforge::cli
