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

#include "config.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "tirforge/error.hpp"

namespace tirforge::cli {

const std::map<std::string, std::string>& setting_defaults() {
  static const std::map<std::string, std::string> kDefaults = {
      {"endpoint", "http://127.0.0.1:8000/v1"},
      {"model", "teacher"},
      {"max_concurrency", "4"},
      {"timeout", "60"},
      {"max_retries", "3"},
      {"temperature", "0"},
      {"backoff_ms", "500"},
      {"cache_dir", ".tirforge-cache"},
      {"no_cache", "false"},
      {"interpreter", "python3"},
      {"exec_timeout", "10"},
      {"exec_mem_mb", "512"},
      {"rel_tol", "1e-6"},
      {"integer_mode", "false"},
      {"filter_level", "exec_ok"},
      {"filter_scope", "chosen_only"},
      {"split_ratio", "0.9"},
      {"seed", ""},
      {"workers", "4"},
  };
  return kDefaults;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string env_name(const std::string& key) {
  std::string out = "TIRFORGE_";
  for (char c : key) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

const char* origin_name(Origin o) {
  switch (o) {
    case Origin::kDefault: return "default";
    case Origin::kEnv: return "env";
    case Origin::kFile: return "config";
    case Origin::kFlag: return "flag";
  }
  return "?";
}

template <class T>
T parse_number(const std::string& key, const std::string& text);

template <>
double parse_number<double>(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || errno == ERANGE) {
    throw PreconditionError(key + ": not a number: '" + text + "'");
  }
  return v;
}

template <>
long long parse_number<long long>(const std::string& key, const std::string& text) {
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || errno == ERANGE) {
    throw PreconditionError(key + ": not an integer: '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off" || text.empty()) return false;
  throw PreconditionError(key + ": not a boolean: '" + text + "'");
}

}  // namespace

std::map<std::string, std::string> parse_config_text(std::string_view text) {
  std::map<std::string, std::string> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  const auto& known = setting_defaults();
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == '[') continue;
    auto eq = s.find('=');
    if (eq == std::string::npos) throw MalformedRow(lineno, "expected key = value");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (value.size() >= 2 && (value.front() == '"' || value.front() == '\'') &&
        value.back() == value.front()) {
      value = value.substr(1, value.size() - 2);
    } else if (auto hash = value.find(" #"); hash != std::string::npos) {
      value = trim(value.substr(0, hash));
    }
    for (auto& c : key) {
      if (c == '-') c = '_';
    }
    if (!known.contains(key)) throw MalformedRow(lineno, "unknown setting '" + key + "'");
    out[key] = value;
  }
  return out;
}

Settings resolve_settings(const std::map<std::string, std::string>& flags,
                          const std::optional<std::filesystem::path>& config_file,
                          const EnvLookup& env) {
  Settings s;
  for (const auto& [k, v] : setting_defaults()) s[k] = {v, Origin::kDefault};
  for (auto& [k, setting] : s) {
    if (auto v = env(env_name(k))) setting = {*v, Origin::kEnv};
  }
  if (config_file) {
    std::ifstream in(*config_file, std::ios::binary);
    if (!in) throw FormatError("cannot read config file " + config_file->string());
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& [k, v] : parse_config_text(ss.str())) s[k] = {v, Origin::kFile};
  }
  for (const auto& [k, v] : flags) {
    if (!s.contains(k)) throw PreconditionError("unknown setting '" + k + "'");
    s[k] = {v, Origin::kFlag};
  }
  return s;
}

RunConfig to_run_config(const Settings& settings, const EnvLookup& env) {
  auto get = [&](const std::string& k) -> const std::string& { return settings.at(k).value; };
  auto num = [&](const std::string& k) { return parse_number<double>(k, get(k)); };
  auto integer = [&](const std::string& k) { return parse_number<long long>(k, get(k)); };

  RunConfig rc;
  rc.endpoint.base_url = get("endpoint");
  rc.endpoint.model_name = get("model");
  rc.endpoint.max_concurrency = static_cast<int>(integer("max_concurrency"));
  rc.endpoint.timeout_s = num("timeout");
  rc.endpoint.max_retries = static_cast<int>(integer("max_retries"));
  rc.endpoint.temperature = num("temperature");
  rc.endpoint.backoff.initial = std::chrono::milliseconds(integer("backoff_ms"));
  rc.endpoint.api_key = env(kApiKeyEnv).value_or("");
  rc.endpoint.validate();

  rc.cache_dir = get("cache_dir");
  rc.use_cache = !parse_bool("no_cache", get("no_cache"));

  rc.sandbox.interpreter = get("interpreter");
  rc.limits.wall_s = num("exec_timeout");
  rc.limits.mem_mb = static_cast<int>(integer("exec_mem_mb"));
  rc.limits.validate();

  rc.equiv.rel_tol = num("rel_tol");
  rc.equiv.integer_mode = parse_bool("integer_mode", get("integer_mode"));
  rc.equiv.validate();

  auto level = parse_filter_level(get("filter_level"));
  if (!level) throw PreconditionError("filter_level must be none, exec_ok or exec_and_correct");
  auto scope = parse_filter_scope(get("filter_scope"));
  if (!scope) throw PreconditionError("filter_scope must be chosen_only or both");
  rc.filter = {*level, *scope};

  rc.split_ratio = num("split_ratio");
  if (!(rc.split_ratio > 0.0 && rc.split_ratio < 1.0)) {
    throw PreconditionError("split_ratio must be in (0, 1)");
  }
  if (!get("seed").empty()) {
    long long seed = integer("seed");
    if (seed < 0) throw PreconditionError("seed must be non-negative");
    rc.seed = static_cast<std::uint64_t>(seed);
  }
  long long workers = integer("workers");
  if (workers < 1) throw PreconditionError("workers must be >= 1");
  rc.workers = static_cast<std::size_t>(workers);
  return rc;
}

std::string render_settings(const Settings& settings, const EnvLookup& env) {
  std::string out;
  for (const auto& [k, s] : settings) {
    out += k + " = " + (s.value.empty() ? "\"\"" : s.value) + "  (" + origin_name(s.origin) + ")\n";
  }
  out += std::string("api_key = ") + (env(kApiKeyEnv).value_or("").empty() ? "<unset>" : "<redacted>") +
         "  (env " + kApiKeyEnv + ")\n";
  return out;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v) return std::nullopt;
    return std::string(v);
  };
}

}  // namespace tirforge::cli
