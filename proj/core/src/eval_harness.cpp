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

#include "tirforge/eval_harness.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <unordered_set>

#include "json.hpp"
#include "tirforge/error.hpp"
#include "tirforge/parallel.hpp"
#include "tirforge/response_parser.hpp"
#include "tirforge/teacher_client.hpp"

namespace tirforge {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

std::vector<EvalProblem> load_benchmark(const std::filesystem::path& path,
                                        std::string_view benchmark_name) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open benchmark file " + path.string());
  const std::string fallback =
      benchmark_name.empty() ? path.stem().string() : std::string(benchmark_name);

  std::vector<EvalProblem> out;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row = json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.is_object()) throw MalformedRow(lineno, "not a JSON object");
    auto text_field = [&](const char* key) {
      auto it = row.find(key);
      if (it == row.end()) throw MalformedRow(lineno, std::string("missing \"") + key + "\"");
      if (it->is_number_integer() && std::string_view(key) != "problem") {
        return std::to_string(it->get<long long>());
      }
      if (!it->is_string()) throw MalformedRow(lineno, std::string("\"") + key + "\" is not a string");
      return it->get<std::string>();
    };
    EvalProblem p;
    p.id = text_field("id");
    p.problem = text_field("problem");
    p.answer = text_field("answer");
    if (p.id.empty()) throw MalformedRow(lineno, "empty id");
    if (p.answer.empty()) throw MalformedRow(lineno, "empty answer");
    auto b = row.find("benchmark");
    p.benchmark = (b != row.end() && b->is_string()) ? b->get<std::string>() : fallback;
    if (!seen.insert(p.id).second) throw DuplicateId(p.id);
    out.push_back(std::move(p));
  }
  return out;
}

EvalDetail evaluate_completion_detailed(const EvalProblem& p, std::string_view completion,
                                        const Sandbox& sandbox, const ExecLimits& limits,
                                        const EquivConfig& cfg) {
  EvalDetail d;
  d.benchmark = p.benchmark;
  d.outcome.problem_id = p.id;
  ParsedCompletion parsed = parse_completion(completion);
  d.final_answer = parsed.final_answer;
  d.outcome.has_code = !parsed.code_blocks.empty();
  if (d.outcome.has_code) {
    ExecutionResult r = sandbox.execute(parsed.code_blocks.front(), limits);
    d.exec_status = r.status;
    d.exec_stdout = std::move(r.stdout_text);
    d.outcome.code_executed = r.status == ExecStatus::kOk;
  }
  if (parsed.final_answer) {
    try {
      d.outcome.answer_correct = answers_equivalent(*parsed.final_answer, p.answer, cfg);
    } catch (const Error&) {
      d.outcome.answer_correct = false;
    }
  }
  return d;
}

EvalOutcome evaluate_completion(const EvalProblem& p, std::string_view completion,
                                const Sandbox& sandbox, const ExecLimits& limits,
                                const EquivConfig& cfg) {
  return evaluate_completion_detailed(p, completion, sandbox, limits, cfg).outcome;
}

Metrics compute_metrics(std::span<const EvalOutcome> outcomes) {
  if (outcomes.empty()) throw EmptyInput("no outcomes to aggregate");
  Metrics m;
  m.n = outcomes.size();
  for (const auto& o : outcomes) {
    m.n_correct += o.answer_correct;
    m.n_code += o.code_executed;
    m.n_code_correct += o.code_and_correct();
  }
  const double n = static_cast<double>(m.n);
  m.pass1 = static_cast<double>(m.n_correct) / n;
  m.code1 = static_cast<double>(m.n_code) / n;
  m.codepass1 = static_cast<double>(m.n_code_correct) / n;
  return m;
}

double agreement_rate(std::span<const PatternLabel> a, std::span<const PatternLabel> b) {
  if (a.size() != b.size()) {
    throw LengthMismatch("label lists differ in length: " + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()));
  }
  if (a.empty()) throw EmptyInput("no labels to compare");
  std::size_t same = 0;
  for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
  return static_cast<double>(same) / static_cast<double>(a.size());
}

std::vector<EvalDetail> run_eval(std::span<const EvalProblem> problems, ChatClient& client,
                                 const Sandbox& sandbox, const ExecLimits& limits,
                                 const EquivConfig& cfg, std::size_t workers) {
  return parallel_map(problems, workers, [&](const EvalProblem& p) {
    auto reply = client.complete(build_student_prompt(p.problem));
    return evaluate_completion_detailed(p, reply.text, sandbox, limits, cfg);
  });
}

std::vector<EvalDetail> score_completions(std::span<const EvalProblem> problems,
                                          std::span<const std::string> completions,
                                          const Sandbox& sandbox, const ExecLimits& limits,
                                          const EquivConfig& cfg, std::size_t workers) {
  if (problems.size() != completions.size()) {
    throw LengthMismatch(std::to_string(problems.size()) + " problems but " +
                         std::to_string(completions.size()) + " completions");
  }
  std::vector<std::size_t> idx(problems.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  return parallel_map(std::span<const std::size_t>(idx), workers, [&](std::size_t i) {
    return evaluate_completion_detailed(problems[i], completions[i], sandbox, limits, cfg);
  });
}

Report build_report(RunMetadata meta, std::span<const EvalDetail> details) {
  std::map<std::string, std::vector<EvalOutcome>> groups;
  for (const auto& d : details) groups[d.benchmark].push_back(d.outcome);
  Report r{std::move(meta), {}};
  for (const auto& [name, outcomes] : groups) {
    r.rows.push_back({name, compute_metrics(outcomes)});
  }
  return r;
}

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f%%", v * 100.0);
  return buf;
}

std::string cell(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '|') out += "\\|";
    else if (c == '\n') out += ' ';
    else out += c;
  }
  return out;
}

}  // namespace

std::string render_markdown(std::span<const Report> reports) {
  std::vector<std::string> benchmarks;
  for (const auto& r : reports) {
    for (const auto& row : r.rows) {
      if (std::find(benchmarks.begin(), benchmarks.end(), row.benchmark) == benchmarks.end()) {
        benchmarks.push_back(row.benchmark);
      }
    }
  }
  if (benchmarks.empty()) throw EmptyInput("report has no metrics rows");
  std::sort(benchmarks.begin(), benchmarks.end());

  std::string md = "| Model |";
  for (const auto& b : benchmarks) md += " " + cell(b) + " | | |";
  md += "\n|---|";
  for (std::size_t i = 0; i < benchmarks.size(); ++i) md += "---:|---:|---:|";
  md += "\n| |";
  for (std::size_t i = 0; i < benchmarks.size(); ++i) md += " Code@1 | Code+Pass@1 | Pass@1 |";
  md += "\n";
  for (const auto& r : reports) {
    md += "| " + cell(r.meta.model_name) + " |";
    for (const auto& b : benchmarks) {
      auto it = std::find_if(r.rows.begin(), r.rows.end(),
                             [&](const BenchmarkMetrics& x) { return x.benchmark == b; });
      if (it == r.rows.end()) {
        md += " - | - | - |";
      } else {
        const Metrics& m = it->metrics;
        md += " " + pct(m.code1) + " | " + pct(m.codepass1) + " | " + pct(m.pass1) + " |";
      }
    }
    md += "\n";
  }
  return md;
}

std::string render_json(std::span<const Report> reports) {
  ojson arr = ojson::array();
  for (const auto& r : reports) {
    ojson rows = ojson::array();
    for (const auto& row : r.rows) {
      const Metrics& m = row.metrics;
      rows.push_back({{"benchmark", row.benchmark},
                      {"n", m.n},
                      {"n_correct", m.n_correct},
                      {"n_code", m.n_code},
                      {"n_code_correct", m.n_code_correct},
                      {"pass1", m.pass1},
                      {"code1", m.code1},
                      {"codepass1", m.codepass1}});
    }
    arr.push_back({{"model_name", r.meta.model_name},
                   {"timestamp", r.meta.timestamp},
                   {"config_hash", r.meta.config_hash},
                   {"benchmarks", std::move(rows)}});
  }
  return ojson{{"reports", std::move(arr)}}.dump(2) + "\n";
}

std::vector<Report> reports_from_json(std::string_view text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw FormatError("report is not valid JSON");
  std::vector<Report> out;
  try {
    for (const auto& r : j.at("reports")) {
      Report rep;
      rep.meta.model_name = r.at("model_name").get<std::string>();
      rep.meta.timestamp = r.at("timestamp").get<std::string>();
      rep.meta.config_hash = r.at("config_hash").get<std::string>();
      for (const auto& row : r.at("benchmarks")) {
        BenchmarkMetrics bm;
        bm.benchmark = row.at("benchmark").get<std::string>();
        bm.metrics.n = row.at("n").get<std::size_t>();
        bm.metrics.n_correct = row.at("n_correct").get<std::size_t>();
        bm.metrics.n_code = row.at("n_code").get<std::size_t>();
        bm.metrics.n_code_correct = row.at("n_code_correct").get<std::size_t>();
        bm.metrics.pass1 = row.at("pass1").get<double>();
        bm.metrics.code1 = row.at("code1").get<double>();
        bm.metrics.codepass1 = row.at("codepass1").get<double>();
        rep.rows.push_back(std::move(bm));
      }
      out.push_back(std::move(rep));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("report JSON has unexpected shape: ") + e.what());
  }
  return out;
}

std::string render_details_jsonl(std::span<const EvalDetail> details) {
  std::string out;
  for (const auto& d : details) {
    ojson row = {{"problem_id", d.outcome.problem_id},
                 {"benchmark", d.benchmark},
                 {"has_code", d.outcome.has_code},
                 {"code_executed", d.outcome.code_executed},
                 {"answer_correct", d.outcome.answer_correct},
                 {"final_answer", d.final_answer ? ojson(*d.final_answer) : ojson(nullptr)},
                 {"exec_status", d.exec_status ? ojson(to_string(*d.exec_status)) : ojson(nullptr)},
                 {"stdout", d.exec_stdout}};
    out += row.dump(-1, ' ', false, ojson::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace tirforge
