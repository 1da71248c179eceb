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

#include <span>
#include <vector>

#include "tirforge/schema.hpp"

namespace tirforge {

// Per-token log-probabilities of one response. Valid when non-empty and every
// entry is finite and <= 0.
struct TokenLogprobs {
  std::vector<double> values;

  void validate() const;
};

// Negative log-likelihood of one sequence: minus the sum of its token
// log-probs, accumulated with compensated summation.
double sft_nll(const TokenLogprobs& lp);

// Mean of sft_nll over sequences. Throws EmptyInput on an empty batch.
double sft_dataset_loss(std::span<const TokenLogprobs> batch);

// Sequence-level log-probs (sums over tokens) of the preferred (w) and
// dispreferred (l) responses under the policy and the frozen reference.
struct DPOInputs {
  double lp_policy_w = 0.0;
  double lp_policy_l = 0.0;
  double lp_ref_w = 0.0;
  double lp_ref_l = 0.0;
  double beta = 0.1;

  void validate() const;
};

struct DPOGradient {
  double d_policy_w = 0.0;
  double d_policy_l = 0.0;
  double d_ref_w = 0.0;  // always 0: the reference is frozen
  double d_ref_l = 0.0;
};

struct DPOOptions {
  // Divide each sequence log-prob by its token count before forming the
  // margin. Off by default; the lengths below are only read when set.
  bool length_normalized = false;
  double len_w = 1.0;
  double len_l = 1.0;
};

double dpo_margin(const DPOInputs& in, const DPOOptions& opts = {});

// -log sigmoid(margin) evaluated as softplus(-margin), stable for any margin.
double dpo_loss(const DPOInputs& in, const DPOOptions& opts = {});

DPOGradient dpo_loss_grad(const DPOInputs& in, const DPOOptions& opts = {});

// Helpers shared by the loss and its tests.
double softplus(double x) noexcept;
double stable_sigmoid(double x) noexcept;

}  // namespace tirforge
