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

#include "tirforge/align_math.hpp"

#include <cmath>
#include <string>

#include "tirforge/error.hpp"

namespace tirforge {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NonFiniteInput(std::string(what) + " is not finite");
}

}  // namespace

void TokenLogprobs::validate() const {
  if (values.empty()) throw EmptyInput("token log-prob list is empty");
  for (double v : values) {
    require_finite(v, "token log-prob");
    if (v > 0.0) throw PreconditionError("token log-prob is positive: " + std::to_string(v));
  }
}

double sft_nll(const TokenLogprobs& lp) {
  lp.validate();
  // Neumaier summation keeps long sequences accurate to the last ulp or two.
  double sum = 0.0;
  double comp = 0.0;
  for (double v : lp.values) {
    double t = sum + v;
    if (std::fabs(sum) >= std::fabs(v)) {
      comp += (sum - t) + v;
    } else {
      comp += (v - t) + sum;
    }
    sum = t;
  }
  double total = -(sum + comp);
  return total == 0.0 ? 0.0 : total;  // avoid -0.0
}

double sft_dataset_loss(std::span<const TokenLogprobs> batch) {
  if (batch.empty()) throw EmptyInput("empty SFT batch");
  double acc = 0.0;
  for (const auto& seq : batch) acc += sft_nll(seq);
  return acc / static_cast<double>(batch.size());
}

void DPOInputs::validate() const {
  require_finite(lp_policy_w, "lp_policy_w");
  require_finite(lp_policy_l, "lp_policy_l");
  require_finite(lp_ref_w, "lp_ref_w");
  require_finite(lp_ref_l, "lp_ref_l");
  require_finite(beta, "beta");
  if (beta < 0.0) throw PreconditionError("beta must be >= 0");
}

double softplus(double x) noexcept {
  return std::fmax(x, 0.0) + std::log1p(std::exp(-std::fabs(x)));
}

double stable_sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

struct Scales {
  double w = 1.0;
  double l = 1.0;
};

Scales scales_for(const DPOOptions& opts) {
  if (!opts.length_normalized) return {};
  if (!(opts.len_w > 0.0) || !(opts.len_l > 0.0) || !std::isfinite(opts.len_w) ||
      !std::isfinite(opts.len_l)) {
    throw PreconditionError("length-normalized DPO needs positive finite lengths");
  }
  return {1.0 / opts.len_w, 1.0 / opts.len_l};
}

}  // namespace

double dpo_margin(const DPOInputs& in, const DPOOptions& opts) {
  in.validate();
  Scales s = scales_for(opts);
  double policy = in.lp_policy_w * s.w - in.lp_policy_l * s.l;
  double ref = in.lp_ref_w * s.w - in.lp_ref_l * s.l;
  double m = in.beta * (policy - ref);
  require_finite(m, "DPO margin");
  return m;
}

double dpo_loss(const DPOInputs& in, const DPOOptions& opts) {
  return softplus(-dpo_margin(in, opts));
}

DPOGradient dpo_loss_grad(const DPOInputs& in, const DPOOptions& opts) {
  double m = dpo_margin(in, opts);
  Scales sc = scales_for(opts);
  double s = stable_sigmoid(-m);
  DPOGradient g;
  g.d_policy_w = -in.beta * s * sc.w;
  g.d_policy_l = in.beta * s * sc.l;
  return g;
}

}  // namespace tirforge
