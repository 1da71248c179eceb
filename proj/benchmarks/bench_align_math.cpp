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

#include <random>
#include <vector>

#include "tirforge/align_math.hpp"

namespace {

std::vector<tirforge::DPOInputs> random_inputs(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> lp(-100, 0), beta(0.01, 2);
  std::vector<tirforge::DPOInputs> v;
  for (std::size_t i = 0; i < n; ++i) v.push_back({lp(rng), lp(rng), lp(rng), lp(rng), beta(rng)});
  return v;
}

void BM_DpoLossAndGrad(benchmark::State& state) {
  auto inputs = random_inputs(1024);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& in = inputs[i++ & 1023];
    benchmark::DoNotOptimize(tirforge::dpo_loss(in));
    benchmark::DoNotOptimize(tirforge::dpo_loss_grad(in));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DpoLossAndGrad);

void BM_SftNll(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> lp(-10, 0);
  tirforge::TokenLogprobs t;
  for (int i = 0; i < state.range(0); ++i) t.values.push_back(lp(rng));
  for (auto _ : state) benchmark::DoNotOptimize(tirforge::sft_nll(t));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SftNll)->Arg(256)->Arg(4096);

}  // namespace
