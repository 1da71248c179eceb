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

#include "tirforge/dataset_builder.hpp"

#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "tirforge/parallel.hpp"
#include "tirforge/teacher_client.hpp"

namespace tirforge {

std::string_view to_string(FilterLevel level) noexcept {
  switch (level) {
    case FilterLevel::kNone: return "none";
    case FilterLevel::kExecOk: return "exec_ok";
    case FilterLevel::kExecAndCorrect: return "exec_and_correct";
  }
  return "unknown";
}

std::string_view to_string(FilterScope scope) noexcept {
  return scope == FilterScope::kChosenOnly ? "chosen_only" : "both";
}

std::optional<FilterLevel> parse_filter_level(std::string_view text) {
  if (text == "none") return FilterLevel::kNone;
  if (text == "exec_ok") return FilterLevel::kExecOk;
  if (text == "exec_and_correct") return FilterLevel::kExecAndCorrect;
  return std::nullopt;
}

std::optional<FilterScope> parse_filter_scope(std::string_view text) {
  if (text == "chosen_only") return FilterScope::kChosenOnly;
  if (text == "both") return FilterScope::kBoth;
  return std::nullopt;
}

ProblemIndex index_problems(std::span<const Problem> problems) {
  ProblemIndex index;
  index.reserve(problems.size());
  for (const auto& p : problems) {
    if (!index.emplace(p.id, p).second) throw DuplicateId(p.id);
  }
  return index;
}

std::string render_solution([[maybe_unused]] const Problem& problem, const Solution& solution) {
  std::string out = normalize_whitespace(solution.reasoning);
  out += "\n\n```python\n";
  out += solution.code;
  if (!solution.code.empty() && solution.code.back() != '\n') out += '\n';
  out += "```\n\nOutputs:\n";
  for (const auto& line : solution.claimed_outputs) {
    out += line;
    out += '\n';
  }
  out += "\nFinal answer: \\boxed{";
  out += solution.final_answer;
  out += "}\n";
  return out;
}

std::string problem_id_of(const SFTExample& example) {
  auto hash = example.id.rfind('#');
  return hash == std::string::npos ? example.id : example.id.substr(0, hash);
}

namespace {

const Problem& lookup(const BuildContext& ctx, const std::string& id) {
  if (!ctx.problems) throw PreconditionError("build context has no problem index");
  auto it = ctx.problems->find(id);
  if (it == ctx.problems->end()) throw UnknownProblemId(id);
  return it->second;
}

// Empty string when the solution passes, else the reason it does not.
std::string check_solution(const Solution& s, const Problem& problem, const BuildContext& ctx,
                           std::string_view which) {
  auto result = ctx.sandbox->execute(s.code, ctx.limits);
  if (!result.ok()) {
    return std::string(which) + " code " + std::string(to_string(result.status));
  }
  if (ctx.policy.level == FilterLevel::kExecAndCorrect && problem.gold_answer &&
      !answers_equivalent(s.final_answer, *problem.gold_answer, ctx.equiv)) {
    return std::string(which) + " answer does not match gold";
  }
  return {};
}

std::vector<bool> kept_mask(std::span<const TeacherRecord> records, const BuildContext& ctx,
                            std::vector<FilterDecision>* decisions) {
  auto d = apply_filter(records, ctx);
  std::vector<bool> mask;
  mask.reserve(d.size());
  for (const auto& x : d) mask.push_back(x.kept);
  if (decisions) *decisions = std::move(d);
  return mask;
}

}  // namespace

std::vector<FilterDecision> apply_filter(std::span<const TeacherRecord> records,
                                         const BuildContext& ctx) {
  // Resolve every id up front so a bad input fails before any execution.
  for (const auto& r : records) lookup(ctx, r.problem_id);
  if (ctx.policy.level != FilterLevel::kNone && !ctx.sandbox) {
    throw PreconditionError("filter policy " + std::string(to_string(ctx.policy.level)) +
                            " needs a sandbox");
  }

  return parallel_map(records, ctx.workers, [&](const TeacherRecord& r) {
    FilterDecision d{r.problem_id, true, {}};
    if (ctx.policy.level == FilterLevel::kNone) return d;
    const Problem& problem = lookup(ctx, r.problem_id);
    d.reason = check_solution(r.chosen, problem, ctx, "chosen");
    if (d.reason.empty() && ctx.policy.applies_to == FilterScope::kBoth) {
      d.reason = check_solution(r.counter, problem, ctx, "counter");
    }
    d.kept = d.reason.empty();
    return d;
  });
}

std::vector<SFTExample> build_sft_dataset(std::span<const TeacherRecord> records,
                                          const BuildContext& ctx,
                                          std::vector<FilterDecision>* decisions) {
  auto mask = kept_mask(records, ctx, decisions);
  std::vector<SFTExample> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!mask[i]) continue;
    const auto& r = records[i];
    const Problem& problem = lookup(ctx, r.problem_id);
    std::string prompt = build_student_prompt(problem.statement);
    for (auto [solution, pattern] : {std::pair{&r.chosen, r.chosen_pattern},
                                     std::pair{&r.counter, r.counter_pattern()}}) {
      SFTExample e;
      e.id = r.problem_id + "#" + to_char(pattern);
      e.prompt = prompt;
      e.target = render_solution(problem, *solution);
      e.pattern = pattern;
      out.push_back(std::move(e));
    }
  }
  return out;
}

std::vector<PreferencePair> build_dpo_pairs(std::span<const TeacherRecord> records,
                                            const BuildContext& ctx,
                                            std::vector<FilterDecision>* decisions) {
  auto mask = kept_mask(records, ctx, decisions);
  std::vector<PreferencePair> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!mask[i]) continue;
    const auto& r = records[i];
    const Problem& problem = lookup(ctx, r.problem_id);
    PreferencePair p;
    p.id = r.problem_id;
    p.prompt = build_student_prompt(problem.statement);
    p.winner = render_solution(problem, r.chosen);
    p.loser = render_solution(problem, r.counter);
    p.winner_pattern = r.chosen_pattern;
    if (p.winner == p.loser) {
      throw SchemaViolation({"record " + r.problem_id + " renders identical winner and loser"});
    }
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with rejection sampling; std::uniform_int_distribution is
  // implementation-defined and would break cross-platform determinism.
  for (std::size_t i = n; i > 1; --i) {
    const std::uint64_t bound = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t draw;
    do {
      draw = rng();
    } while (draw >= limit);
    std::swap(perm[i - 1], perm[draw % bound]);
  }
  return perm;
}

std::string render_manifest(std::string_view existing, std::string_view stage, const Manifest& m) {
  nlohmann::json root = nlohmann::json::object();
  if (!existing.empty()) {
    auto parsed = nlohmann::json::parse(existing, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) root = std::move(parsed);
  }
  nlohmann::json section = {
      {"records", m.records},
      {"kept_records", m.kept_records},
      {"sft_examples", m.sft_examples},
      {"dpo_pairs", m.dpo_pairs},
      {"train", m.train},
      {"val", m.val},
      {"split_ratio", m.split_ratio},
      {"seed", m.seed ? nlohmann::json(*m.seed) : nlohmann::json(nullptr)},
      {"filter_policy",
       {{"level", to_string(m.policy.level)}, {"applies_to", to_string(m.policy.applies_to)}}},
      {"tool_versions", m.tool_versions},
  };
  root[std::string(stage)] = std::move(section);
  return root.dump(2) + "\n";
}

void write_manifest(const std::filesystem::path& path, std::string_view stage, const Manifest& m) {
  std::string existing;
  if (std::ifstream in(path, std::ios::binary); in) {
    std::stringstream ss;
    ss << in.rdbuf();
    existing = ss.str();
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << render_manifest(existing, stage, m);
  if (!out) throw FormatError("cannot write manifest " + path.string());
}

}  // namespace tirforge
