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
#include <vector>

#include "tirforge/dataset_builder.hpp"

namespace {

void BM_SplitTrainVal(benchmark::State& state) {
  struct Row {
    std::string id;
  };
  std::vector<Row> rows;
  for (int i = 0; i < state.range(0); ++i) rows.push_back({"q" + std::to_string(i / 2)});
  auto key = [](const Row& r) { return r.id; };
  for (auto _ : state) {
    auto s = tirforge::split_train_val(std::span<const Row>(rows), 0.9, 42, key);
    benchmark::DoNotOptimize(s.train.size());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SplitTrainVal)->Arg(2000)->Arg(20000);

void BM_RenderSolution(benchmark::State& state) {
  tirforge::Problem p{"p", "How many primes are below 100?", "25", "bench", {}};
  tirforge::Solution s{"Sieve the range and count what survives.",
                       "n = 100\nsieve = [True] * n\nfor i in range(2, 10):\n"
                       "    for j in range(i * i, n, i):\n        sieve[j] = False\n"
                       "print(sum(sieve[2:]))",
                       {"25"},
                       "25"};
  for (auto _ : state) benchmark::DoNotOptimize(tirforge::render_solution(p, s));
}
BENCHMARK(BM_RenderSolution);

}  // namespace
