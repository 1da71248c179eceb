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
#include <map>
#include <string>
#include <vector>

#include "tirforge/schema.hpp"

namespace tirforge::testing {

std::filesystem::path fixtures_dir();
std::string read_text(const std::filesystem::path& p);
void write_text(const std::filesystem::path& p, const std::string& text);

// Self-deleting scratch directory.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A valid record whose two solutions differ in every field.
TeacherRecord sample_record(const std::string& problem_id, PatternLabel chosen = PatternLabel::kA);
Problem sample_problem(const std::string& id);

// Outcome of running the teacher fixture corpus through the parser. Each
// fixture's expected/*.json either holds the record the reply must produce
// or the name of the typed error it must raise.
struct CorpusReport {
  std::size_t valid_total = 0;
  std::size_t valid_parsed = 0;
  std::size_t malformed_total = 0;
  std::size_t malformed_matched = 0;
  std::vector<std::string> failures;
};
CorpusReport run_teacher_corpus(const std::filesystem::path& dir);

// Random valid solution for render/parse round trips.
Solution random_solution(std::uint64_t seed);

// Renders `n` random solutions and parses them back. Returns a description
// of every solution whose code or final answer did not survive.
std::vector<std::string> render_round_trip_failures(std::size_t n, std::uint64_t seed);

std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& p);
std::vector<PatternLabel> load_labels_by_id(const std::filesystem::path& p,
                                            const std::vector<std::string>& order);

// Runs the CLI entry point in-process; args exclude the program name.
struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};
CliResult run_cli(const std::vector<std::string>& args);

// Offline pipeline over the fixture problems against a running mock
// endpoint: generate, then build-sft and build-dpo into `work`/out. Every
// file of the output directory is returned with its bytes. The API key
// variable is set for the duration of the run.
struct PipelineRun {
  std::vector<CliResult> steps;
  std::map<std::string, std::string> files;
  bool ok() const;
};
PipelineRun run_offline_pipeline(const std::filesystem::path& work, const std::string& base_url,
                                 const std::string& seed);

}  // namespace tirforge::testing
