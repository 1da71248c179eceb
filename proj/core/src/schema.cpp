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

#include "tirforge/schema.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <initializer_list>
#include <regex>

#include "json.hpp"

namespace tirforge {

using ojson = nlohmann::ordered_json;

SchemaViolation::SchemaViolation(std::vector<std::string> violations)
    : ParseError([&] {
        std::string msg = "schema violation:";
        for (const auto& v : violations) msg += " [" + v + "]";
        return msg;
      }()),
      violations_(std::move(violations)) {}

char to_char(PatternLabel p) noexcept { return p == PatternLabel::kA ? 'A' : 'B'; }

std::string_view pattern_name(PatternLabel p) noexcept {
  return p == PatternLabel::kA ? "algorithmic" : "calculator";
}

PatternLabel complement(PatternLabel p) noexcept {
  return p == PatternLabel::kA ? PatternLabel::kB : PatternLabel::kA;
}

std::optional<PatternLabel> parse_pattern_label(std::string_view text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return std::nullopt;
  auto e = text.find_last_not_of(" \t\r\n");
  text = text.substr(b, e - b + 1);
  if (text == "A") return PatternLabel::kA;
  if (text == "B") return PatternLabel::kB;
  return std::nullopt;
}

std::string_view to_string(ExecStatus s) noexcept {
  switch (s) {
    case ExecStatus::kOk: return "ok";
    case ExecStatus::kRuntimeError: return "runtime_error";
    case ExecStatus::kTimeout: return "timeout";
    case ExecStatus::kResourceLimit: return "resource_limit";
    case ExecStatus::kSpawnError: return "spawn_error";
  }
  return "unknown";
}

void DPOConfig::validate() const {
  if (!std::isfinite(beta) || beta <= 0.0) {
    throw PreconditionError("DPO beta must be finite and > 0");
  }
}

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

namespace {

bool has_fence_line(std::string_view code) {
  std::size_t pos = 0;
  while (pos <= code.size()) {
    auto nl = code.find('\n', pos);
    auto line = code.substr(pos, nl == std::string_view::npos ? code.npos : nl - pos);
    auto b = line.find_first_not_of(" \t");
    if (b != std::string_view::npos && line.substr(b).starts_with("```")) return true;
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return false;
}

void add_unique(std::vector<std::string>& out, std::string msg) {
  if (std::find(out.begin(), out.end(), msg) == out.end()) out.push_back(std::move(msg));
}

void check_solution(const Solution& s, std::vector<std::string>& out) {
  if (normalize_whitespace(s.code).empty()) add_unique(out, "empty code block");
  if (normalize_whitespace(s.final_answer).empty()) add_unique(out, "empty final answer");
  if (has_fence_line(s.code)) add_unique(out, "code block contains a fence delimiter");
}

}  // namespace

std::vector<std::string> validate_record(const TeacherRecord& record) {
  std::vector<std::string> out;
  if (record.problem_id.empty()) add_unique(out, "empty problem id");
  check_solution(record.chosen, out);
  check_solution(record.counter, out);

  auto same = [](const std::string& a, const std::string& b) {
    auto na = normalize_whitespace(a);
    return !na.empty() && na == normalize_whitespace(b);
  };
  if (same(record.chosen.reasoning, record.counter.reasoning)) {
    add_unique(out, "duplicated reasoning");
  }
  if (same(record.chosen.code, record.counter.code)) add_unique(out, "duplicated code");
  return out;
}

std::vector<std::string> reasoning_warnings(const Solution& solution) {
  static const std::regex kListMarker(R"(^\s*([-*•]\s|\d+[.)]\s|\(\d+\)\s?))");
  std::vector<std::string> out;
  std::size_t lineno = 0;
  std::size_t pos = 0;
  const std::string& text = solution.reasoning;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    std::string line = text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    if (std::regex_search(line, kListMarker)) {
      out.push_back("list marker in reasoning line " + std::to_string(lineno));
    }
    if (nl == std::string::npos) break;
    pos = nl + 1;
    ++lineno;
  }
  return out;
}

// --- JSON-lines ------------------------------------------------------------

namespace {

ojson parse_object(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw FormatError("row is not a JSON object");
  return j;
}

const ojson& field(const ojson& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw FormatError(std::string("missing field \"") + name + "\"");
  return *it;
}

std::string string_field(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (!v.is_string()) throw FormatError(std::string("field \"") + name + "\" must be a string");
  return v.get<std::string>();
}

// Ids may arrive as integers from hand-written corpora.
std::string id_field(const ojson& j, const char* name) {
  const auto& v = field(j, name);
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  throw FormatError(std::string("field \"") + name + "\" must be a string id");
}

PatternLabel pattern_field(const ojson& j, const char* name) {
  auto p = parse_pattern_label(string_field(j, name));
  if (!p) throw FormatError(std::string("field \"") + name + "\" must be \"A\" or \"B\"");
  return *p;
}

ExtraFields collect_extra(const ojson& j, std::initializer_list<std::string_view> known) {
  ExtraFields extra;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      extra.emplace(it.key(), it.value().dump());
    }
  }
  return extra;
}

ojson solution_json(const Solution& s) {
  ojson j;
  j["reasoning"] = s.reasoning;
  j["code"] = s.code;
  j["claimed_outputs"] = s.claimed_outputs;
  j["final_answer"] = s.final_answer;
  return j;
}

Solution solution_from(const ojson& j) {
  if (!j.is_object()) throw FormatError("solution must be an object");
  Solution s;
  s.reasoning = string_field(j, "reasoning");
  s.code = string_field(j, "code");
  const auto& outs = field(j, "claimed_outputs");
  if (!outs.is_array()) throw FormatError("claimed_outputs must be an array");
  for (const auto& o : outs) {
    if (!o.is_string()) throw FormatError("claimed_outputs entries must be strings");
    s.claimed_outputs.push_back(o.get<std::string>());
  }
  s.final_answer = string_field(j, "final_answer");
  return s;
}

std::string dump(const ojson& j) { return j.dump(-1, ' ', false, ojson::error_handler_t::replace); }

}  // namespace

std::string to_json_line(const Problem& v) {
  ojson j;
  j["id"] = v.id;
  j["statement"] = v.statement;
  j["gold_answer"] = v.gold_answer ? ojson(*v.gold_answer) : ojson(nullptr);
  j["source"] = v.source;
  return dump(j);
}

std::string to_json_line(const Solution& v) { return dump(solution_json(v)); }

std::string to_json_line(const TeacherRecord& v) {
  ojson j;
  j["problem_id"] = v.problem_id;
  j["chosen_pattern"] = std::string(1, to_char(v.chosen_pattern));
  j["chosen"] = solution_json(v.chosen);
  j["counter"] = solution_json(v.counter);
  j["raw"] = v.raw;
  return dump(j);
}

std::string to_json_line(const SFTExample& v) {
  ojson j;
  j["id"] = v.id;
  j["prompt"] = v.prompt;
  j["target"] = v.target;
  j["pattern"] = std::string(1, to_char(v.pattern));
  return dump(j);
}

std::string to_json_line(const PreferencePair& v) {
  ojson j;
  j["id"] = v.id;
  j["prompt"] = v.prompt;
  j["winner"] = v.winner;
  j["loser"] = v.loser;
  j["winner_pattern"] = std::string(1, to_char(v.winner_pattern));
  return dump(j);
}

template <>
Problem from_json_line<Problem>(std::string_view line) {
  auto j = parse_object(line);
  Problem p;
  p.id = id_field(j, "id");
  p.statement = string_field(j, "statement");
  if (p.id.empty()) throw FormatError("empty problem id");
  if (p.statement.empty()) throw FormatError("empty problem statement");
  if (auto it = j.find("gold_answer"); it != j.end() && !it->is_null()) {
    if (it->is_string()) {
      p.gold_answer = it->get<std::string>();
    } else if (it->is_number()) {
      p.gold_answer = it->dump();
    } else {
      throw FormatError("gold_answer must be a string, number or null");
    }
  }
  if (auto it = j.find("source"); it != j.end()) {
    if (!it->is_string()) throw FormatError("source must be a string");
    p.source = it->get<std::string>();
  }
  p.extra = collect_extra(j, {"id", "statement", "gold_answer", "source"});
  return p;
}

template <>
Solution from_json_line<Solution>(std::string_view line) {
  return solution_from(parse_object(line));
}

template <>
TeacherRecord from_json_line<TeacherRecord>(std::string_view line) {
  auto j = parse_object(line);
  TeacherRecord r;
  r.problem_id = id_field(j, "problem_id");
  r.chosen_pattern = pattern_field(j, "chosen_pattern");
  r.chosen = solution_from(field(j, "chosen"));
  r.counter = solution_from(field(j, "counter"));
  r.raw = string_field(j, "raw");
  r.extra = collect_extra(j, {"problem_id", "chosen_pattern", "chosen", "counter", "raw"});
  return r;
}

template <>
SFTExample from_json_line<SFTExample>(std::string_view line) {
  auto j = parse_object(line);
  SFTExample e;
  e.id = id_field(j, "id");
  e.prompt = string_field(j, "prompt");
  e.target = string_field(j, "target");
  e.pattern = pattern_field(j, "pattern");
  e.extra = collect_extra(j, {"id", "prompt", "target", "pattern"});
  return e;
}

template <>
PreferencePair from_json_line<PreferencePair>(std::string_view line) {
  auto j = parse_object(line);
  PreferencePair p;
  p.id = id_field(j, "id");
  p.prompt = string_field(j, "prompt");
  p.winner = string_field(j, "winner");
  p.loser = string_field(j, "loser");
  p.winner_pattern = pattern_field(j, "winner_pattern");
  p.extra = collect_extra(j, {"id", "prompt", "winner", "loser", "winner_pattern"});
  return p;
}

}  // namespace tirforge
