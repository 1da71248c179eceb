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

#include <string_view>

// Prompt templates compiled in from core/assets/. Each contains the slot
// kProblemSlot exactly once.
namespace tirforge::assets {

inline constexpr std::string_view kProblemSlot = "<the math problem here>";

std::string_view double_pattern_prompt();
std::string_view judge_prompt();
std::string_view student_prompt();

}  // namespace tirforge::assets
