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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tirforge/schema.hpp"

namespace tirforge {

// Structure recovered from a free-form model transcript.
struct ParsedCompletion {
  std::string reasoning;
  std::vector<std::string> code_blocks;
  std::string claimed_outputs;
  std::optional<std::string> final_answer;
};

enum class AnswerMarker { kBoxedFirst, kPhraseFirst };

struct CompletionParseOptions {
  // Order in which answer markers are consulted. Gold answers in the common
  // benchmarks are boxed-style, so \boxed{...} wins by default.
  AnswerMarker priority = AnswerMarker::kBoxedFirst;
};

// Returns the largest balanced JSON object embedded in `raw` after removing
// markdown fences and surrounding prose. Returns `raw` itself (trimmed) when it
// already is a single JSON object. Throws NoJsonFound.
std::string extract_json_payload(std::string_view raw);

// Maps the teacher's JSON reply onto a TeacherRecord. Requires keys
// chosen_pattern, chosen_solution and counter_solution; each solution needs
// reasoning, code_blocks (exactly one entry), outputs and final_answer. The
// "problem" echo is optional. Throws MissingKey, BadPattern, SchemaViolation.
TeacherRecord parse_teacher_record(std::string_view json, std::string problem_id);

// extract_json_payload + parse_teacher_record; keeps the untouched reply in
// TeacherRecord::raw.
TeacherRecord parse_teacher_response(std::string_view raw, std::string problem_id);

// Splits a transcript into reasoning, fenced code blocks, claimed outputs and
// the final answer. Fences tagged output/stdout/text count as outputs, not
// code. Never throws.
ParsedCompletion parse_completion(std::string_view text,
                                  const CompletionParseOptions& options = {});

// Content of the last \boxed{...} (or \fbox{...}) with balanced braces.
std::optional<std::string> last_boxed(std::string_view text);

}  // namespace tirforge
