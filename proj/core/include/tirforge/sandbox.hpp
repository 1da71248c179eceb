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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tirforge/schema.hpp"

namespace tirforge {

struct ExecLimits {
  double wall_s = 10.0;
  int mem_mb = 512;
  std::size_t stdout_cap_bytes = 65536;
  bool allow_network = false;

  // Throws PreconditionError unless every limit is positive.
  void validate() const;
};

struct SandboxConfig {
  // Resolved against PATH when it has no slash.
  std::string interpreter = "python3";
  std::vector<std::string> interpreter_args;
  // File name the code is written to inside the scratch directory.
  std::string script_name = "main.py";
  // Parent for per-run scratch directories; empty means the system temp dir.
  std::filesystem::path scratch_root;
};

// Which isolation facilities actually took effect for one run. Missing ones
// degrade to best effort rather than failing the execution.
struct IsolationReport {
  bool network_namespace = false;
  bool socket_filter = false;
  bool filesystem_confined = false;
};

struct ConsistencyMismatch {
  std::size_t line = 0;
  std::string claimed;
  std::string actual;

  bool operator==(const ConsistencyMismatch&) const = default;
};

struct ConsistencyVerdict {
  bool consistent = false;
  std::optional<ConsistencyMismatch> first_mismatch;
};

// Runs tool code as a fresh interpreter process inside an empty scratch
// directory that is removed afterwards. The process gets its own process
// group, an address-space limit, a CPU backstop, no stdin and a scrubbed
// environment. With allow_network=false it is moved into an empty network
// namespace where permitted and internet sockets are refused via seccomp.
// Writes outside the scratch directory are blocked with Landlock where the
// kernel supports it.
class Sandbox {
 public:
  explicit Sandbox(SandboxConfig config = {});

  ExecutionResult execute(std::string_view code, const ExecLimits& limits,
                          IsolationReport* report = nullptr) const;

  const SandboxConfig& config() const noexcept { return config_; }
  // Absolute interpreter path, or empty when it cannot be found.
  const std::string& interpreter_path() const noexcept { return interpreter_path_; }

 private:
  SandboxConfig config_;
  std::string interpreter_path_;
};

ExecutionResult execute_code(std::string_view code, const ExecLimits& limits,
                             const SandboxConfig& config = {});

// Compares claimed stdout lines with the actual stdout. Trailing whitespace is
// ignored; integers compare exactly and other numeric tokens after rounding
// to 10 significant digits. A result whose status is not ok is never
// consistent.
ConsistencyVerdict verify_outputs(std::span<const std::string> claimed,
                                  const ExecutionResult& result);

// Rewrites every numeric token of a line into its comparison form.
std::string normalize_output_line(std::string_view line);

}  // namespace tirforge
