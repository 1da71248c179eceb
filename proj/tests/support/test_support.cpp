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

#include "test_support.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tirforge::testing {

std::filesystem::path fixtures_dir() { return TIRFORGE_FIXTURES_DIR; }

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

TempDir::TempDir() {
  std::string tmpl = (std::filesystem::temp_directory_path() / "tirforge-test-XXXXXX").string();
  if (!::mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
  path_ = tmpl;
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

TeacherRecord sample_record(const std::string& problem_id, PatternLabel chosen) {
  TeacherRecord r;
  r.problem_id = problem_id;
  r.chosen_pattern = chosen;
  r.chosen = {"Loop over the candidates and count the ones that qualify.",
              "count = sum(1 for k in range(10) if k % 2 == 0)\nprint(count)",
              {"5"},
              "5"};
  r.counter = {"Half of the ten digits are even, which the interpreter confirms.",
               "print(10 // 2)",
               {"5"},
               "5"};
  return r;
}

Problem sample_problem(const std::string& id) {
  return {id, "How many even digits are there?", "5", "unit", {}};
}

}  // namespace tirforge::testing

#include <algorithm>
#include <random>
#include <unordered_map>

#include "json.hpp"
#include "tirforge/dataset_builder.hpp"
#include "tirforge/response_parser.hpp"

namespace tirforge::testing {

namespace {

using json = nlohmann::json;

Solution solution_from_expected(const json& j) {
  Solution s;
  s.reasoning = j.at("reasoning").get<std::string>();
  s.code = j.at("code").get<std::string>();
  s.claimed_outputs = j.at("claimed_outputs").get<std::vector<std::string>>();
  s.final_answer = j.at("final_answer").get<std::string>();
  return s;
}

std::string error_name(const std::exception& e) {
  if (dynamic_cast<const MissingKey*>(&e)) return "MissingKey";
  if (dynamic_cast<const BadPattern*>(&e)) return "BadPattern";
  if (dynamic_cast<const SchemaViolation*>(&e)) return "SchemaViolation";
  if (dynamic_cast<const NoJsonFound*>(&e)) return "NoJsonFound";
  if (dynamic_cast<const ParseError*>(&e)) return "ParseError";
  return "other";
}

}  // namespace

CorpusReport run_teacher_corpus(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.path().extension() == ".txt") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  CorpusReport rep;
  for (const auto& f : files) {
    const std::string stem = f.stem().string();
    json expected = json::parse(read_text(dir / "expected" / (stem + ".json")));
    const std::string raw = read_text(f);
    const bool ok = expected.at("ok").get<bool>();
    if (ok) {
      ++rep.valid_total;
      const json& er = expected.at("record");
      try {
        auto r = parse_teacher_response(raw, er.at("problem_id").get<std::string>());
        bool same = to_char(r.chosen_pattern) == er.at("chosen_pattern").get<std::string>()[0] &&
                    r.chosen == solution_from_expected(er.at("chosen")) &&
                    r.counter == solution_from_expected(er.at("counter")) && r.raw == raw &&
                    validate_record(r).empty();
        if (same) {
          ++rep.valid_parsed;
        } else {
          rep.failures.push_back(stem + ": parsed record differs from expected");
        }
      } catch (const std::exception& e) {
        rep.failures.push_back(stem + ": unexpected " + error_name(e) + ": " + e.what());
      }
    } else {
      ++rep.malformed_total;
      const std::string want = expected.at("error").get<std::string>();
      try {
        parse_teacher_response(raw, stem);
        rep.failures.push_back(stem + ": expected " + want + " but parsing succeeded");
      } catch (const std::exception& e) {
        bool match = error_name(e) == want;
        if (match && expected.contains("key")) {
          match = dynamic_cast<const MissingKey&>(e).key() == expected["key"].get<std::string>();
        }
        if (match) {
          ++rep.malformed_matched;
        } else {
          rep.failures.push_back(stem + ": expected " + want + ", got " + error_name(e) + ": " +
                                 e.what());
        }
      }
    }
  }
  return rep;
}

Solution random_solution(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& v) { return v[rng() % v.size()]; };
  static const std::vector<std::string> words = {
      "the",  "sum",  "of",      "squares", "count", "each", "value", "loop", "prime",
      "root", "then", "divides", "{x}",     "50%",   "a^2",  "\\pi",  "=",    "final answer"};
  static const std::vector<std::string> answers = {
      "42",         "-7",      "3.14159", "\\frac{1}{2}", "\\sqrt{2}", "x^{2}+1",
      "\\{1, 2\\}", "(0, 1]",  "12 cm",   "\\boxed{9}",   "1,000",     "\\text{yes}"};
  static const std::vector<std::string> stmts = {
      "x = 3", "print(x * 2)", "for i in range(3):\n    print(i)", "import math",
      "print(math.comb(5, 2))", "s = '{}'.format(1)", "if x > 1:\n    print('big')",
      "print(\"Final answer: 5\")", "# \\boxed{not this}"};

  Solution s;
  std::size_t nw = 5 + rng() % 20;
  for (std::size_t i = 0; i < nw; ++i) s.reasoning += (i ? " " : "") + pick(words);
  s.reasoning += ".";
  std::size_t ns = 1 + rng() % 5;
  for (std::size_t i = 0; i < ns; ++i) s.code += (i ? "\n" : "") + pick(stmts);
  std::size_t no = rng() % 4;
  for (std::size_t i = 0; i < no; ++i) s.claimed_outputs.push_back(std::to_string(rng() % 1000));
  s.final_answer = pick(answers) + (rng() % 3 == 0 ? " + " + std::to_string(rng() % 9) : "");
  return s;
}

std::vector<std::string> render_round_trip_failures(std::size_t n, std::uint64_t seed) {
  std::vector<std::string> failures;
  Problem problem{"rt", "statement", std::nullopt, "", {}};
  for (std::size_t i = 0; i < n; ++i) {
    Solution s = random_solution(seed + i);
    std::string text = render_solution(problem, s);
    ParsedCompletion pc = parse_completion(text);
    if (pc.code_blocks.size() != 1 || pc.code_blocks[0] != s.code) {
      failures.push_back("solution " + std::to_string(i) + ": code did not round-trip");
    } else if (!pc.final_answer || *pc.final_answer != s.final_answer) {
      failures.push_back("solution " + std::to_string(i) + ": final answer '" + s.final_answer +
                         "' came back as '" + pc.final_answer.value_or("<none>") + "'");
    }
  }
  return failures;
}

std::vector<EvalOutcome> load_outcomes(const std::filesystem::path& p) {
  std::vector<EvalOutcome> out;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    out.push_back({j.at("problem_id").get<std::string>(), j.at("has_code").get<bool>(),
                   j.at("code_executed").get<bool>(), j.at("answer_correct").get<bool>()});
  }
  return out;
}

std::vector<PatternLabel> load_labels_by_id(const std::filesystem::path& p,
                                            const std::vector<std::string>& order) {
  std::unordered_map<std::string, PatternLabel> by_id;
  std::istringstream in(read_text(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    by_id[j.at("id").get<std::string>()] = *parse_pattern_label(j.at("label").get<std::string>());
  }
  std::vector<PatternLabel> out;
  for (const auto& id : order) out.push_back(by_id.at(id));
  return out;
}

}  // namespace tirforge::testing

#include <cstdlib>
#include <sstream>

#include "cli/cli.hpp"

namespace tirforge::testing {

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"tirforge"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

bool PipelineRun::ok() const {
  return std::all_of(steps.begin(), steps.end(), [](const CliResult& r) { return r.code == 0; });
}

PipelineRun run_offline_pipeline(const std::filesystem::path& work, const std::string& base_url,
                                 const std::string& seed) {
  namespace fs = std::filesystem;
  const auto problems = (fixtures_dir() / "pipeline" / "problems.jsonl").string();
  const auto records = (work / "records.jsonl").string();
  const auto out_dir = work / "out";
  const std::vector<std::string> common{"--seed", seed, "--workers", "4"};
  auto with = [&](std::vector<std::string> args) {
    args.insert(args.end(), common.begin(), common.end());
    return args;
  };

  ::setenv("TIRFORGE_API_KEY", "offline-test-key", 1);
  PipelineRun run;
  run.steps.push_back(run_cli(with({"generate", "--problems", problems, "--out", records,
                                    "--rejects", (work / "rejects.jsonl").string(),
                                    "--endpoint", base_url, "--cache-dir",
                                    (work / "cache").string()})));
  for (const char* stage : {"build-sft", "build-dpo"}) {
    if (!run.ok()) break;
    run.steps.push_back(run_cli(with({stage, "--problems", problems, "--records", records,
                                      "--out-dir", out_dir.string()})));
  }
  ::unsetenv("TIRFORGE_API_KEY");

  if (fs::exists(out_dir)) {
    for (const auto& e : fs::directory_iterator(out_dir)) {
      run.files[e.path().filename().string()] = read_text(e.path());
    }
  }
  if (fs::exists(records)) run.files["records.jsonl"] = read_text(records);
  return run;
}

}  // namespace tirforge::testing
