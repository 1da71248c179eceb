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

#include "tirforge/response_parser.hpp"

#include <algorithm>
#include <cctype>
#include <utility>

#include "json.hpp"

namespace tirforge {

using json = nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// End index (exclusive) of the object starting at text[start] == '{', honoring
// JSON string literals, or npos when the braces never balance.
std::size_t match_object(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

bool is_json_object(std::string_view text) {
  return !text.empty() && text.front() == '{' && json::accept(text);
}

// "```json\n...\n```" -> inner text; anything else unchanged.
std::string_view strip_outer_fence(std::string_view text) {
  if (!text.starts_with("```") || text.size() < 6 || !text.ends_with("```")) return text;
  auto nl = text.find('\n');
  if (nl == std::string_view::npos || nl + 3 > text.size() - 3) return text;
  return trim(text.substr(nl + 1, text.size() - 3 - (nl + 1)));
}

std::string strip_code_fence(std::string code) {
  std::string_view t = trim(code);
  if (t.starts_with("```")) {
    auto nl = t.find('\n');
    if (nl != std::string_view::npos) {
      auto body = t.substr(nl + 1);
      auto tail = body.rfind("```");
      if (tail != std::string_view::npos && trim(body.substr(tail + 3)).empty()) {
        body = body.substr(0, tail);
      }
      code = std::string(body);
    }
  }
  while (!code.empty() && (code.back() == '\n' || code.back() == '\r')) code.pop_back();
  return code;
}

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  return {};
}

Solution parse_solution(const json& root, const std::string& key,
                        std::vector<std::string>& violations) {
  auto it = root.find(key);
  if (it == root.end()) throw MissingKey(key);
  const json& obj = *it;
  if (!obj.is_object()) {
    throw SchemaViolation({key + " is not an object"});
  }
  auto need = [&](const char* name) -> const json& {
    auto f = obj.find(name);
    if (f == obj.end()) throw MissingKey(key + "." + name);
    return *f;
  };

  Solution s;
  const json& reasoning = need("reasoning");
  if (!reasoning.is_string()) violations.push_back(key + ".reasoning is not a string");
  s.reasoning = scalar_text(reasoning);

  const json& blocks = need("code_blocks");
  if (!blocks.is_array()) {
    violations.push_back(key + ".code_blocks is not an array");
  } else if (blocks.size() != 1) {
    violations.push_back(key + ": expected exactly one code block, got " +
                         std::to_string(blocks.size()));
  } else if (!blocks[0].is_string()) {
    violations.push_back(key + ".code_blocks[0] is not a string");
  } else {
    s.code = strip_code_fence(blocks[0].get<std::string>());
  }

  const json& outputs = need("outputs");
  if (outputs.is_array()) {
    for (const auto& o : outputs) s.claimed_outputs.push_back(scalar_text(o));
  } else if (outputs.is_string()) {
    std::string all = outputs.get<std::string>();
    std::size_t pos = 0;
    while (pos < all.size()) {
      auto nl = all.find('\n', pos);
      s.claimed_outputs.push_back(all.substr(pos, nl == std::string::npos ? nl : nl - pos));
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
  } else {
    violations.push_back(key + ".outputs is not an array");
  }

  const json& answer = need("final_answer");
  if (!(answer.is_string() || answer.is_number())) {
    violations.push_back(key + ".final_answer is not a string");
  }
  s.final_answer = std::string(trim(scalar_text(answer)));
  return s;
}

}  // namespace

std::string extract_json_payload(std::string_view raw) {
  std::string_view text = trim(raw);
  if (is_json_object(text)) return std::string(text);
  std::string_view inner = strip_outer_fence(text);
  if (is_json_object(inner)) return std::string(inner);

  std::string_view best;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '{') {
      ++i;
      continue;
    }
    auto end = match_object(text, i);
    if (end != std::string_view::npos) {
      auto candidate = text.substr(i, end - i);
      if (json::accept(candidate)) {
        if (candidate.size() > best.size()) best = candidate;
        // Objects nested inside an accepted one are strictly smaller.
        i = end;
        continue;
      }
    }
    ++i;
  }
  if (best.empty()) throw NoJsonFound();
  return std::string(best);
}

TeacherRecord parse_teacher_record(std::string_view json_text, std::string problem_id) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("teacher payload is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw SchemaViolation({"teacher payload is not a JSON object"});

  auto pat = root.find("chosen_pattern");
  if (pat == root.end()) throw MissingKey("chosen_pattern");
  std::optional<PatternLabel> label;
  if (pat->is_string()) {
    std::string v(trim(pat->get<std::string>()));
    if (v.size() == 1) v[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(v[0])));
    label = parse_pattern_label(v);
  }
  if (!label) throw BadPattern(pat->is_string() ? pat->get<std::string>() : pat->dump());

  std::vector<std::string> violations;
  TeacherRecord record;
  record.problem_id = std::move(problem_id);
  record.chosen_pattern = *label;
  record.chosen = parse_solution(root, "chosen_solution", violations);
  record.counter = parse_solution(root, "counter_solution", violations);
  record.raw = std::string(json_text);

  for (auto& v : validate_record(record)) {
    if (std::find(violations.begin(), violations.end(), v) == violations.end()) {
      violations.push_back(std::move(v));
    }
  }
  if (!violations.empty()) throw SchemaViolation(std::move(violations));
  return record;
}

TeacherRecord parse_teacher_response(std::string_view raw, std::string problem_id) {
  auto record = parse_teacher_record(extract_json_payload(raw), std::move(problem_id));
  record.raw = std::string(raw);
  return record;
}

std::optional<std::string> last_boxed(std::string_view text) {
  // Scan left to right over outermost macros only, so a boxed expression
  // nested in another one never wins over its container.
  std::optional<std::string> found;
  std::size_t i = 0;
  while (i < text.size()) {
    std::size_t macro_len = 0;
    if (text.compare(i, 6, "\\boxed") == 0) {
      macro_len = 6;
    } else if (text.compare(i, 5, "\\fbox") == 0) {
      macro_len = 5;
    } else {
      ++i;
      continue;
    }
    std::size_t j = i + macro_len;
    while (j < text.size() && text[j] == ' ') ++j;
    if (j < text.size() && text[j] == '{') {
      int depth = 0;
      std::size_t close = std::string_view::npos;
      for (std::size_t k = j; k < text.size(); ++k) {
        if (text[k] == '{') ++depth;
        if (text[k] == '}' && --depth == 0) {
          close = k;
          break;
        }
      }
      if (close == std::string_view::npos) {
        i = j + 1;  // unbalanced; keep looking for a later complete one
        continue;
      }
      found = std::string(trim(text.substr(j + 1, close - j - 1)));
      i = close + 1;
    } else if (j > i + macro_len && j < text.size()) {
      // "\boxed 5": a single whitespace-delimited token.
      auto e = text.find_first_of(" \t\r\n$", j);
      found = std::string(text.substr(j, e == std::string_view::npos ? e : e - j));
      i = e == std::string_view::npos ? text.size() : e;
    } else {
      i = j;
    }
  }
  return found;
}

namespace {

struct Fence {
  std::size_t open_line;
  std::size_t close_line;  // one past the last content line
  bool is_output;
  std::string content;
};

std::optional<std::string> phrase_answer(std::string_view text) {
  std::string low = lower(text);
  static constexpr std::string_view kMarker = "final answer";
  auto pos = low.rfind(kMarker);
  if (pos == std::string::npos) return std::nullopt;
  std::size_t i = pos + kMarker.size();
  auto skip = [&] {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ':' ||
                               text[i] == '=' || text[i] == '*')) {
      ++i;
    }
  };
  skip();
  if (low.compare(i, 3, "is ") == 0) {
    i += 3;
    skip();
  }
  auto eol = text.find('\n', i);
  std::string_view rest = trim(text.substr(i, eol == std::string_view::npos ? eol : eol - i));
  while (rest.empty() && eol != std::string_view::npos) {
    i = eol + 1;
    eol = text.find('\n', i);
    rest = trim(text.substr(i, eol == std::string_view::npos ? eol : eol - i));
  }
  while (!rest.empty() && (rest.back() == '.' || rest.back() == '*')) rest.remove_suffix(1);
  rest = trim(rest);
  if (rest.empty()) return std::nullopt;
  if (auto boxed = last_boxed(rest)) return boxed;
  return std::string(rest);
}

bool is_output_tag(std::string_view tag) {
  static constexpr std::string_view kTags[] = {"output", "outputs", "stdout", "text",
                                               "plaintext", "console"};
  return std::find(std::begin(kTags), std::end(kTags), tag) != std::end(kTags);
}

}  // namespace

ParsedCompletion parse_completion(std::string_view text, const CompletionParseOptions& options) {
  std::vector<std::string_view> lines;
  std::vector<std::size_t> offsets;
  for (std::size_t pos = 0; pos <= text.size();) {
    auto nl = text.find('\n', pos);
    offsets.push_back(pos);
    lines.push_back(text.substr(pos, nl == std::string_view::npos ? nl : nl - pos));
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }

  std::vector<Fence> fences;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view l = trim(lines[i]);
    if (!l.starts_with("```")) continue;
    std::string tag = lower(trim(l.substr(3)));
    if (auto sp = tag.find_first_of(" \t{"); sp != std::string::npos) tag.resize(sp);
    Fence f{i, lines.size(), is_output_tag(tag), {}};
    std::size_t j = i + 1;
    for (; j < lines.size(); ++j) {
      std::string_view t = trim(lines[j]);
      if (t.starts_with("```") && trim(t.substr(3)).empty()) break;
    }
    f.close_line = j;
    for (std::size_t k = i + 1; k < j; ++k) {
      if (k > i + 1) f.content.push_back('\n');
      f.content.append(lines[k]);
    }
    fences.push_back(std::move(f));
    i = j;
  }

  ParsedCompletion out;
  const Fence* first_code = nullptr;
  for (const auto& f : fences) {
    if (f.is_output) continue;
    out.code_blocks.push_back(f.content);
    if (!first_code) first_code = &f;
  }

  if (first_code) {
    out.reasoning = std::string(trim(text.substr(0, offsets[first_code->open_line])));
  } else {
    out.reasoning = std::string(trim(text));
  }

  std::optional<std::string> boxed = last_boxed(text);
  std::optional<std::string> phrase = phrase_answer(text);
  if (options.priority == AnswerMarker::kBoxedFirst) {
    out.final_answer = boxed ? boxed : phrase;
  } else {
    out.final_answer = phrase ? phrase : boxed;
  }

  // Outputs: everything after the first code block up to the answer line,
  // skipping further code blocks and any "Outputs:" header.
  if (first_code) {
    std::size_t start = std::min(first_code->close_line + 1, lines.size());
    std::size_t stop = lines.size();
    for (std::size_t i = lines.size(); i-- > start;) {
      std::string low = lower(lines[i]);
      if (low.find("final answer") != std::string::npos || low.find("\\boxed") != std::string::npos) {
        stop = i;
        break;
      }
    }
    std::string collected;
    for (std::size_t i = start; i < stop; ++i) {
      auto in_code = std::find_if(fences.begin(), fences.end(), [&](const Fence& f) {
        return !f.is_output && i >= f.open_line && i <= f.close_line;
      });
      if (in_code != fences.end()) continue;
      std::string_view l = trim(lines[i]);
      if (l.starts_with("```")) continue;
      std::string low = lower(l);
      if (collected.empty() && (low == "outputs:" || low == "output:")) continue;
      collected.append(lines[i]);
      collected.push_back('\n');
    }
    out.claimed_outputs = std::string(trim(collected));
  }
  return out;
}

}  // namespace tirforge
