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

#include <benchmark/benchmark.h>

#include <string>

#include "tirforge/answer_equiv.hpp"
#include "tirforge/response_parser.hpp"

namespace {

const std::string kReply =
    "Sure, here is the JSON you asked for:\n```json\n"
    R"j({"problem":"Count the even digits.","chosen_pattern":"A",)j"
    R"j("chosen_solution":{"reasoning":"Enumerate digits.","code_blocks":["print(sum(1 for d in range(10) if d % 2 == 0))"],"outputs":["5"],"final_answer":"5"},)j"
    R"j("counter_solution":{"reasoning":"Half of ten digits are even.","code_blocks":["print(10 // 2)"],"outputs":["5"],"final_answer":"5"}})j"
    "\n```\nLet me know if you need more.";

void BM_ParseTeacherResponse(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(tirforge::parse_teacher_response(kReply, "p"));
}
BENCHMARK(BM_ParseTeacherResponse);

void BM_ParseCompletion(benchmark::State& state) {
  const std::string text =
      "We compute directly.\n\n```python\nprint(2 + 2)\n```\n\nOutputs:\n4\n\n"
      "Final answer: \\boxed{\\frac{8}{2}}\n";
  for (auto _ : state) benchmark::DoNotOptimize(tirforge::parse_completion(text));
}
BENCHMARK(BM_ParseCompletion);

void BM_AnswersEquivalent(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(tirforge::answers_equivalent("\\boxed{\\dfrac{1}{2}}", "0.5"));
    benchmark::DoNotOptimize(tirforge::answers_equivalent("1{,}000", "1000"));
    benchmark::DoNotOptimize(tirforge::answers_equivalent("3.1415926", "3.1415927"));
  }
  state.SetItemsProcessed(state.iterations() * 3);
}
BENCHMARK(BM_AnswersEquivalent);

}  // namespace
