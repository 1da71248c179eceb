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

#include <string>
#include <string_view>

namespace tirforge {

struct EquivConfig {
  double rel_tol = 1e-6;
  bool normalize_latex = true;
  // Benchmarks with integer-only answers (e.g. AIME): both sides must be
  // integers and equal exactly.
  bool integer_mode = false;

  // Throws PreconditionError unless rel_tol is finite and > 0.
  void validate() const;
};

// Canonical comparison form of an answer string: \boxed / $ / \text wrappers
// removed, whitespace, trailing periods and thousands separators dropped,
// lowercased, and common LaTeX rewritten (\frac{a}{b} -> a/b,
// \sqrt{x} -> sqrt(x), \pi -> pi, ^{x} -> ^x). Idempotent.
std::string normalize_answer(std::string_view text, bool normalize_latex = true);

// True iff after normalization the strings are equal, or both are exact
// rationals with equal value, or both are decimal literals within rel_tol.
// Symmetric in its two answer arguments.
bool answers_equivalent(std::string_view pred, std::string_view gold,
                        const EquivConfig& cfg = {});

}  // namespace tirforge
