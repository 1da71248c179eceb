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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "tirforge/align_math.hpp"
#include "tirforge/error.hpp"

namespace tirforge {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

// Independent reference: the loss in extended precision straight from the
// definition, with the overflow-safe branch chosen by sign.
long double ref_loss(long double pw, long double pl, long double rw, long double rl,
                     long double beta) {
  long double m = beta * ((pw - pl) - (rw - rl));
  return m > 0 ? std::log1p(std::exp(-m)) : -m + std::log1p(std::exp(m));
}

void expect_rel(double got, long double want, double tol, const char* what) {
  long double scale = std::max<long double>(std::fabs(want), 1e-300L);
  EXPECT_LE(std::fabs(static_cast<long double>(got) - want) / scale, tol)
      << what << ": got " << got << " want " << static_cast<double>(want);
}

TEST(SftNll, WorkedExamples) {
  EXPECT_NEAR(sft_nll({{-0.1, -0.2, -0.3}}), 0.6, 1e-15);
  EXPECT_EQ(sft_nll({{0.0}}), 0.0);
  EXPECT_FALSE(std::signbit(sft_nll({{0.0, -0.0}})));
}

TEST(SftNll, ThousandHalves) {
  TokenLogprobs lp{std::vector<double>(1000, -kLn2)};
  EXPECT_NEAR(sft_nll(lp), 693.14718055994530942, 1e-10);
}

TEST(SftNll, CompensatedSumBeatsNaiveOnMixedMagnitudes) {
  TokenLogprobs lp;
  long double exact = 0;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> big(-1e6, -1e5), tiny(-1e-9, 0);
  for (int i = 0; i < 20000; ++i) {
    double v = i % 100 == 0 ? big(rng) : tiny(rng);
    lp.values.push_back(v);
    exact += v;
  }
  expect_rel(sft_nll(lp), -exact, 1e-15, "sft_nll");
}

TEST(SftNll, Preconditions) {
  EXPECT_THROW(sft_nll({{}}), EmptyInput);
  EXPECT_THROW(sft_nll({{-0.1, 0.5}}), PreconditionError);
  EXPECT_THROW(sft_nll({{-0.1, std::nan("")}}), NonFiniteInput);
  EXPECT_THROW(sft_nll({{-std::numeric_limits<double>::infinity()}}), NonFiniteInput);
}

TEST(SftNll, NonNegativeZeroOnlyForCertainTokens) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> lp(-20, 0);
  for (int i = 0; i < 500; ++i) {
    TokenLogprobs t;
    for (int k = 0, n = 1 + static_cast<int>(rng() % 40); k < n; ++k) t.values.push_back(lp(rng));
    EXPECT_GT(sft_nll(t), 0.0);
  }
  EXPECT_EQ(sft_nll({{0.0, 0.0, 0.0}}), 0.0);
}

TEST(SftDatasetLoss, MeanOverSequences) {
  std::vector<TokenLogprobs> batch{{{-1.0, -1.0}}, {{-4.0}}};
  EXPECT_DOUBLE_EQ(sft_dataset_loss(batch), 3.0);
  EXPECT_THROW(sft_dataset_loss({}), EmptyInput);
}

TEST(Dpo, EqualSumsGiveLn2) {
  DPOInputs in{-3, -7, -3, -7, 0.1};
  EXPECT_NEAR(dpo_loss(in), kLn2, 1e-15);
  EXPECT_EQ(dpo_margin(in), 0.0);
}

TEST(Dpo, WorkedMargin) {
  DPOInputs in{-5, -10, -6, -6, 0.1};
  EXPECT_NEAR(dpo_margin(in), 0.5, 1e-15);
  EXPECT_NEAR(dpo_loss(in), 0.47407698418010668, 1e-12);
}

TEST(Dpo, ZeroBetaIsLn2) {
  DPOInputs in{-1, -50, -30, -2, 0.0};
  EXPECT_NEAR(dpo_loss(in), kLn2, 1e-15);
}

TEST(DpoGrad, AtZeroMargin) {
  auto g = dpo_loss_grad({-2, -2, -2, -2, 0.1});
  EXPECT_NEAR(g.d_policy_w, -0.05, 1e-15);
  EXPECT_NEAR(g.d_policy_l, 0.05, 1e-15);
  EXPECT_EQ(g.d_ref_w, 0.0);
  EXPECT_EQ(g.d_ref_l, 0.0);
}

TEST(DpoGrad, SaturatedMarginHasVanishingGradient) {
  auto g = dpo_loss_grad({0, -1000, 0, 0, 1.0});
  EXPECT_LT(std::fabs(g.d_policy_w), 1e-300);
  EXPECT_GE(dpo_loss({0, -1000, 0, 0, 1.0}), 0.0);
}

TEST(DpoGrad, MatchesCentralDifferences) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<long double> lp(-100, 0), beta(0.01, 2);
  const long double h = 1e-5L;
  for (int i = 0; i < 1000; ++i) {
    long double pw = lp(rng), pl = lp(rng), rw = lp(rng), rl = lp(rng), b = beta(rng);
    DPOInputs in{static_cast<double>(pw), static_cast<double>(pl), static_cast<double>(rw),
                 static_cast<double>(rl), static_cast<double>(b)};
    // Re-read the rounded inputs so the oracle sees exactly what the code sees.
    pw = in.lp_policy_w;
    pl = in.lp_policy_l;
    rw = in.lp_ref_w;
    rl = in.lp_ref_l;
    b = in.beta;

    auto g = dpo_loss_grad(in);
    long double fd_w = (ref_loss(pw + h, pl, rw, rl, b) - ref_loss(pw - h, pl, rw, rl, b)) / (2 * h);
    long double fd_l = (ref_loss(pw, pl + h, rw, rl, b) - ref_loss(pw, pl - h, rw, rl, b)) / (2 * h);
    expect_rel(g.d_policy_w, fd_w, 1e-6, "d_policy_w");
    expect_rel(g.d_policy_l, fd_l, 1e-6, "d_policy_l");
    expect_rel(dpo_loss(in), ref_loss(pw, pl, rw, rl, b), 1e-12, "loss");
  }
}

TEST(DpoProperties, SoftplusIdentityShiftMonotoneSwap) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> lp(-100, 0), beta(0.01, 2), c(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    DPOInputs in{lp(rng), lp(rng), lp(rng), lp(rng), beta(rng)};
    double m = dpo_margin(in);
    double L = dpo_loss(in);
    EXPECT_NEAR(softplus(-m) + m, softplus(m), 1e-12 * std::max(1.0, std::fabs(m)));

    DPOInputs shifted = in;
    double k = c(rng);
    shifted.lp_policy_w += k;
    shifted.lp_policy_l += k;
    EXPECT_NEAR(dpo_loss(shifted), L, 1e-9 * std::max(1.0, L));
    shifted = in;
    shifted.lp_ref_w += k;
    shifted.lp_ref_l += k;
    EXPECT_NEAR(dpo_loss(shifted), L, 1e-9 * std::max(1.0, L));

    DPOInputs up = in;
    up.lp_policy_w += 0.5;
    if (m < 30) EXPECT_LT(dpo_loss(up), L);
    else EXPECT_LE(dpo_loss(up), L);

    DPOInputs swapped{in.lp_policy_l, in.lp_policy_w, in.lp_ref_l, in.lp_ref_w, in.beta};
    EXPECT_NEAR(dpo_loss(swapped), L + m, 1e-9 * std::max(1.0, std::fabs(L + m)));
  }
}

TEST(Dpo, HugeMarginsDoNotOverflow) {
  DPOInputs bad{0, -1e6, 0, 0, 2.0};
  EXPECT_EQ(dpo_loss(bad), 0.0);
  DPOInputs worse{-1e6, 0, 0, 0, 2.0};
  EXPECT_DOUBLE_EQ(dpo_loss(worse), 2e6);
  EXPECT_TRUE(std::isfinite(dpo_loss_grad(worse).d_policy_w));
  EXPECT_DOUBLE_EQ(dpo_loss_grad(worse).d_policy_w, -2.0);
}

TEST(Dpo, RejectsBadInputs) {
  EXPECT_THROW(dpo_loss({std::nan(""), 0, 0, 0, 0.1}), NonFiniteInput);
  EXPECT_THROW(dpo_loss({0, std::numeric_limits<double>::infinity(), 0, 0, 0.1}),
               NonFiniteInput);
  EXPECT_THROW(dpo_loss({0, 0, 0, 0, -0.1}), PreconditionError);
  EXPECT_THROW(dpo_loss_grad({0, 0, 0, std::nan(""), 0.1}), NonFiniteInput);
  // The margin itself overflowing is also rejected.
  EXPECT_THROW(dpo_loss({-1e308, 1e308, 0, 0, 10}), NonFiniteInput);
}

TEST(Dpo, LengthNormalizedVariant) {
  DPOInputs in{-10, -40, -20, -20, 0.5};
  DPOOptions opts{true, 10, 20};
  // m = 0.5 * ((-1 - -2) - (-2 - -1)) = 1
  EXPECT_NEAR(dpo_margin(in, opts), 1.0, 1e-15);
  EXPECT_NEAR(dpo_loss(in, opts), std::log1p(std::exp(-1.0)), 1e-15);
  auto g = dpo_loss_grad(in, opts);
  EXPECT_NEAR(g.d_policy_w, -0.5 * stable_sigmoid(-1.0) / 10, 1e-15);
  EXPECT_NEAR(g.d_policy_l, 0.5 * stable_sigmoid(-1.0) / 20, 1e-15);
  EXPECT_THROW(dpo_loss(in, DPOOptions{true, 0, 1}), PreconditionError);
}

TEST(Helpers, StableSigmoidAndSoftplus) {
  EXPECT_EQ(stable_sigmoid(0), 0.5);
  EXPECT_EQ(stable_sigmoid(-1000), 0.0);
  EXPECT_EQ(stable_sigmoid(1000), 1.0);
  EXPECT_NEAR(softplus(0), kLn2, 1e-16);
  EXPECT_EQ(softplus(1000), 1000);
  EXPECT_EQ(softplus(-1000), 0.0);
}

}  // namespace
}  // namespace tirforge
