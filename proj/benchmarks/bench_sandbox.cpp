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

#include "tirforge/sandbox.hpp"

namespace {

// Dominated by interpreter start-up; tracks the fixed cost per tool call.
void BM_SandboxPrint(benchmark::State& state) {
  tirforge::Sandbox sandbox;
  tirforge::ExecLimits limits;
  for (auto _ : state) {
    auto r = sandbox.execute("print(2**10)", limits);
    if (!r.ok()) state.SkipWithError("sandbox run failed");
  }
}
BENCHMARK(BM_SandboxPrint)->Unit(benchmark::kMillisecond)->Iterations(20);

}  // namespace
