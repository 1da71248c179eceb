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

// Domain types shared by every pipeline stage, plus their canonical JSON-lines
// encoding. All types are plain values and safe to share across threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tirforge/error.hpp"

namespace tirforge {

// A = algorithmic pattern (problem recast as a complete program).
// B = calculator pattern (prose reasoning, code only for arithmetic/checks).
enum class PatternLabel { kA, kB };

char to_char(PatternLabel p) noexcept;
std::string_view pattern_name(PatternLabel p) noexcept;
PatternLabel complement(PatternLabel p) noexcept;
// Accepts exactly "A" or "B" (surrounding whitespace ignored).
std::optional<PatternLabel> parse_pattern_label(std::string_view text);

// Fields present in a JSONL row that this version does not know about, keyed
// by name with the raw JSON value text. Kept on read, never written back.
using ExtraFields = std::map<std::string, std::string>;

struct Problem {
  std::string id;
  std::string statement;
  std::optional<std::string> gold_answer;
  std::string source;
  ExtraFields extra;

  bool operator==(const Problem&) const = default;
};

struct Solution {
  std::string reasoning;
  std::string code;
  std::vector<std::string> claimed_outputs;
  std::string final_answer;

  bool operator==(const Solution&) const = default;
};

struct TeacherRecord {
  std::string problem_id;
  PatternLabel chosen_pattern = PatternLabel::kA;
  Solution chosen;
  Solution counter;
  std::string raw;
  ExtraFields extra;

  PatternLabel counter_pattern() const noexcept {
    return complement(chosen_pattern);
  }
  bool operator==(const TeacherRecord&) const = default;
};

struct SFTExample {
  std::string id;
  std::string prompt;
  std::string target;
  PatternLabel pattern = PatternLabel::kA;
  ExtraFields extra;

  bool operator==(const SFTExample&) const = default;
};

struct PreferencePair {
  std::string id;
  std::string prompt;
  std::string winner;
  std::string loser;
  PatternLabel winner_pattern = PatternLabel::kA;
  ExtraFields extra;

  bool operator==(const PreferencePair&) const = default;
};

enum class ExecStatus { kOk, kRuntimeError, kTimeout, kResourceLimit, kSpawnError };

std::string_view to_string(ExecStatus s) noexcept;

struct ExecutionResult {
  ExecStatus status = ExecStatus::kSpawnError;
  std::string stdout_text;
  std::string stderr_text;
  std::int64_t wall_ms = 0;
  // Exit code when the process exited normally, else -signal.
  int exit_code = 0;
  bool stdout_truncated = false;

  bool ok() const noexcept { return status == ExecStatus::kOk; }
};

struct EvalOutcome {
  std::string problem_id;
  bool has_code = false;
  bool code_executed = false;
  bool answer_correct = false;

  bool code_and_correct() const noexcept { return code_executed && answer_correct; }
  bool operator==(const EvalOutcome&) const = default;
};

struct Metrics {
  std::size_t n = 0;
  std::size_t n_correct = 0;
  std::size_t n_code = 0;
  std::size_t n_code_correct = 0;
  double pass1 = 0.0;
  double code1 = 0.0;
  double codepass1 = 0.0;

  bool operator==(const Metrics&) const = default;
};

struct DPOConfig {
  double beta = 0.1;

  // Throws PreconditionError unless beta is finite and > 0.
  void validate() const;
};

// Returns an empty list iff the record satisfies every type invariant and the
// teacher prompt's strict constraints. Duplicate content is exact string
// equality after whitespace normalization.
std::vector<std::string> validate_record(const TeacherRecord& record);

// Soft checks on the one-paragraph reasoning rule: list markers such as "- ",
// "* ", "1." or "(1)" at the start of a line. Reported, never rejected.
std::vector<std::string> reasoning_warnings(const Solution& solution);

// Collapses every whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view text);

// --- JSON-lines encoding ---------------------------------------------------
//
// Field names and order are fixed; see README for the exact row shapes.

std::string to_json_line(const Problem& v);
std::string to_json_line(const Solution& v);
std::string to_json_line(const TeacherRecord& v);
std::string to_json_line(const SFTExample& v);
std::string to_json_line(const PreferencePair& v);

// Throws FormatError when the line is not valid JSON or does not match the record shape.
template <class T>
T from_json_line(std::string_view line);

template <>
Problem from_json_line<Problem>(std::string_view line);
template <>
Solution from_json_line<Solution>(std::string_view line);
template <>
TeacherRecord from_json_line<TeacherRecord>(std::string_view line);
template <>
SFTExample from_json_line<SFTExample>(std::string_view line);
template <>
PreferencePair from_json_line<PreferencePair>(std::string_view line);

// Reads one row per non-blank line. Errors carry the 1-based line number.
template <class T>
std::vector<T> read_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<T> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(from_json_line<T>(line));
    } catch (const FormatError& e) {
      throw MalformedRow(lineno, e.what());
    }
  }
  return rows;
}

template <class T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  for (const auto& r : rows) out << to_json_line(r) << '\n';
  if (!out) throw FormatError("write failed: " + path.string());
}

template <class T>
void write_jsonl(const std::filesystem::path& path, const std::vector<T>& rows) {
  write_jsonl(path, std::span<const T>(rows));
}

}  // namespace tirforge
