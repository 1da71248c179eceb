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

#include "tirforge/answer_equiv.hpp"
#include "tirforge/sandbox.hpp"
#include "tirforge/schema.hpp"

namespace tirforge {

class ChatClient;

struct EvalProblem {
  std::string id;
  std::string problem;
  std::string answer;
  std::string benchmark;

  bool operator==(const EvalProblem&) const = default;
};

// Reads JSONL rows {"id","problem","answer"} plus an optional "benchmark".
// Rows without a benchmark field take `benchmark_name`, or the file stem when
// that is empty. Throws MalformedRow (1-based line) and DuplicateId.
std::vector<EvalProblem> load_benchmark(const std::filesystem::path& path,
                                        std::string_view benchmark_name = {});

// Everything observed while scoring one completion. The booleans live in
// `outcome`; the rest lets stricter scoring rules be recomputed later.
struct EvalDetail {
  EvalOutcome outcome;
  std::string benchmark;
  std::optional<std::string> final_answer;
  std::optional<ExecStatus> exec_status;
  std::string exec_stdout;
};

// Scores a completion: has_code means at least one code block, code_executed
// means the first block ran with status ok, answer_correct compares the final
// answer with the gold answer. Failures become false fields, never throws for
// bad model output.
EvalDetail evaluate_completion_detailed(const EvalProblem& p, std::string_view completion,
                                        const Sandbox& sandbox, const ExecLimits& limits,
                                        const EquivConfig& cfg);

EvalOutcome evaluate_completion(const EvalProblem& p, std::string_view completion,
                                const Sandbox& sandbox, const ExecLimits& limits,
                                const EquivConfig& cfg);

// Throws EmptyInput.
Metrics compute_metrics(std::span<const EvalOutcome> outcomes);

// Fraction of positions where the two label lists agree. Throws LengthMismatch
// and EmptyInput.
double agreement_rate(std::span<const PatternLabel> a, std::span<const PatternLabel> b);

// Queries the candidate model with the student prompt for every problem and
// scores the replies on `workers` threads. Result order follows `problems`.
std::vector<EvalDetail> run_eval(std::span<const EvalProblem> problems, ChatClient& client,
                                 const Sandbox& sandbox, const ExecLimits& limits,
                                 const EquivConfig& cfg, std::size_t workers);

// Same scoring against completions supplied up front (completions[i] answers
// problems[i]).
std::vector<EvalDetail> score_completions(std::span<const EvalProblem> problems,
                                          std::span<const std::string> completions,
                                          const Sandbox& sandbox, const ExecLimits& limits,
                                          const EquivConfig& cfg, std::size_t workers);

struct RunMetadata {
  std::string model_name;
  std::string timestamp;
  std::string config_hash;

  bool operator==(const RunMetadata&) const = default;
};

struct BenchmarkMetrics {
  std::string benchmark;
  Metrics metrics;

  bool operator==(const BenchmarkMetrics&) const = default;
};

// One evaluated model: one row per benchmark, sorted by benchmark name.
struct Report {
  RunMetadata meta;
  std::vector<BenchmarkMetrics> rows;

  bool operator==(const Report&) const = default;
};

// Groups details by benchmark (sorted by name) and computes the metrics of
// each group.
Report build_report(RunMetadata meta, std::span<const EvalDetail> details);

// Markdown table: one line per report, one column group per benchmark with
// Code@1, Code+Pass@1 and Pass@1 sub-columns. Throws EmptyInput when there is
// no row at all.
std::string render_markdown(std::span<const Report> reports);

// JSON twin of render_markdown carrying the exact counts.
std::string render_json(std::span<const Report> reports);
std::vector<Report> reports_from_json(std::string_view text);

// JSONL with one row per scored problem (raw booleans plus answer and stdout).
std::string render_details_jsonl(std::span<const EvalDetail> details);

}  // namespace tirforge
