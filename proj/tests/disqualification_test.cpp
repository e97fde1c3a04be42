/*
 * Copyright 2026 The gamma-audit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "gamma_audit/disqualification.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "test_util.hpp"

namespace gamma_audit {
namespace {

using testing::four_rows;

constexpr LossKind kSq = LossKind::kSquared;
constexpr LossKind kZo = LossKind::kExpectedZeroOne;

// Hand-rolled threshold for the square-root form.
double sqrt_threshold(double gamma, double a, double eta) {
  return std::sqrt(2.0 * gamma * a / eta);
}

TEST(JudgeTest, SelfNeverDisqualifies) {
  const ScoreCard h{0.3, 0.2};
  for (double g : {0.0, 1.0, 1e9}) {
    EXPECT_FALSE(judge(h, h, ScalingFunction::sqrt_form(0.1), g).disqualified);
  }
  EXPECT_FALSE(judge(h, h, ScalingFunction::exact(), 1.0).disqualified);
}

TEST(JudgeTest, DominatingAlternativeWinsAtEveryGamma) {
  const ScoreCard h{0.30, 0.20};
  const ScoreCard better{0.25, 0.05};
  for (double g : {0.0, 1.0, 1e12}) {
    EXPECT_TRUE(judge(h, better, ScalingFunction::sqrt_form(0.1), g).disqualified);
  }
  EXPECT_TRUE(judge(h, better, ScalingFunction::exact(), 1.0).disqualified);
  EXPECT_TRUE(judge(h, better, ScalingFunction::sqrt_form(0.1),
                    Gamma::infinite()).disqualified);
  EXPECT_EQ(boundary_gamma(h, better, ScalingFunction::sqrt_form(0.1)),
            Gamma::infinite());
}

TEST(JudgeTest, DirectionFollowsSignOfImbalance) {
  const ScoreCard h{0.3, -0.2};
  const ScoreCard hp{0.3, -0.05};
  const Verdict v = judge(h, hp, ScalingFunction::sqrt_form(0.1), 1.0);
  EXPECT_EQ(v.direction_used, Direction::kStoT);
  EXPECT_NEAR(v.delta_imbalance, 0.15, 1e-15);
  EXPECT_TRUE(v.disqualified);
  // The gap is measured in h's direction only, so overshooting still counts.
  const Verdict over = judge(h, {0.3, 0.5}, ScalingFunction::sqrt_form(0.1), 1.0);
  EXPECT_NEAR(over.delta_imbalance, 0.7, 1e-15);
  EXPECT_EQ(over.direction_used, Direction::kStoT);
}

TEST(JudgeTest, BalancedModelCannotBeDisqualified) {
  const ScoreCard h{0.4, 0.0};
  for (double imb : {-0.3, 0.0, 0.3}) {
    const Verdict v = judge(h, {0.1, imb}, ScalingFunction::exact(), 1.0);
    EXPECT_FALSE(v.disqualified);
    EXPECT_LE(v.delta_imbalance, 0.0);
  }
}

TEST(JudgeTest, ForcedDirectionOverrides) {
  const ScoreCard h{0.3, 0.0};
  const ScoreCard hp{0.3, -0.1};
  EXPECT_FALSE(judge(h, hp, ScalingFunction::exact(), 1.0).disqualified);
  EXPECT_TRUE(judge(h, hp, ScalingFunction::exact(), 1.0, 0, 0, Direction::kTtoS)
                  .disqualified);
  EXPECT_FALSE(judge(h, hp, ScalingFunction::exact(), 1.0, 0, 0, Direction::kStoT)
                   .disqualified);
}

TEST(JudgeTest, SlackExceedsGap) {
  const ScoreCard h{0.3, 0.5};
  const ScoreCard hp{0.3, 0.0};
  const auto f = ScalingFunction::sqrt_form(0.1);
  EXPECT_FALSE(judge(h, hp, f, 1.0, 0.6).disqualified);
  EXPECT_TRUE(judge(h, hp, f, 1.0, 0.4).disqualified);
}

TEST(JudgeTest, LossSlackEntersThreshold) {
  const ScoreCard h{0.30, 0.5};
  const ScoreCard hp{0.29, 0.0};
  const Verdict v = judge(h, hp, ScalingFunction::sqrt_form(0.1), 1.0, 0.0, 0.02);
  EXPECT_NEAR(v.scaled_threshold, std::sqrt(0.2), 1e-12);
  EXPECT_NEAR(v.scaled_threshold, 0.447, 5e-4);
  EXPECT_TRUE(v.disqualified);
  EXPECT_NEAR(v.margin, 0.5 - std::sqrt(0.2), 1e-12);
}

TEST(DisqualifiesTest, BayesVersusConstantOnNearlyEqualBaseRates) {
  // Population with no features, base rates 0.49 and 0.51, equal groups.
  const FiniteDistribution p({{{}, Group::kS, 0.5, 0.49}, {{}, Group::kT, 0.5, 0.51}});
  const LabeledDataset& d = p.exact_dataset();
  const std::vector<double> bayes{0.0, 1.0};
  const std::vector<double> half{0.5, 0.5};
  const PredictionVector h = p.expand(bayes);
  const PredictionVector hp = p.expand(half);
  const Verdict v = disqualifies(hp, h, d, kZo, kZo,
                                 ScalingFunction::sqrt_form(0.245), 1.0);
  EXPECT_NEAR(v.delta_imbalance, 1.0, 1e-12);
  EXPECT_NEAR(v.delta_loss, 0.01, 1e-12);
  EXPECT_NEAR(v.scaled_threshold, sqrt_threshold(1.0, 0.01, 0.245), 1e-12);
  EXPECT_LT(v.scaled_threshold, 0.3);
  EXPECT_TRUE(v.disqualified);
}

TEST(DisqualifiesTest, MissingPositivesThrow) {
  const LabeledDataset d({{{0.0}, Group::kS, 1}, {{0.0}, Group::kT, 0}});
  const PredictionVector h(d, {0.1, 0.2});
  EXPECT_THROW(disqualifies(h, h, d, kSq, kZo, ScalingFunction::exact(), 1.0),
               MissingPositivesError);
}

TEST(IsGammaFairTest, WitnessIsFirstDisqualifier) {
  const LabeledDataset d = four_rows();
  const PredictionVector h(d, {0.2, 0.4, 0.9, 0.4});
  const PredictionVector worse(d, {0.0, 0.9, 1.0, 0.9});
  const PredictionVector better(d, {0.6, 0.3, 0.8, 0.3});
  const ClassifierFamily fam =
      ClassifierFamily::from_predictions({h, worse, better, better});
  FairnessParams p;
  const auto r = is_gamma_fair(h, fam, d, kSq, kZo, ScalingFunction::sqrt_form(0.25), p);
  EXPECT_FALSE(r.fair);
  ASSERT_TRUE(r.witness.has_value());
  EXPECT_EQ(*r.witness, 2u);
  EXPECT_TRUE(is_gamma_fair(h, ClassifierFamily::from_predictions({h}), d, kSq,
                            kZo, ScalingFunction::exact(), p)
                  .fair);
}

TEST(IsGammaFairTest, ExactFormAcceptsParetoOptimalModel) {
  // Every more balanced member costs accuracy.
  const ScoreCard h{0.10, 0.30};
  const std::vector<ScoreCard> fam{{0.12, 0.20}, {0.20, 0.0}, {0.05, 0.45}};
  FairnessParams p;
  EXPECT_TRUE(is_gamma_fair_cards(h, fam, ScalingFunction::exact(), p).fair);
  // Finite gamma lets the cheap ones through.
  p.gamma = 1000.0;
  EXPECT_TRUE(is_gamma_fair_cards(h, fam, ScalingFunction::sqrt_form(0.1), p).fair);
  p.gamma = 0.01;
  EXPECT_FALSE(is_gamma_fair_cards(h, fam, ScalingFunction::sqrt_form(0.1), p).fair);
}

TEST(BoundaryGammaTest, MinorityExampleClosedForm) {
  const ScoreCard h{0.149, 0.11};
  const ScoreCard hp{0.150, 0.051};
  const Gamma g = boundary_gamma(h, hp, ScalingFunction::sqrt_form(0.03));
  const double expected = 0.03 * 0.059 * 0.059 / (2 * 0.001);
  EXPECT_NEAR(g.value(), expected, 1e-9);
  EXPECT_NEAR(g.value(), 0.052215, 1e-6);
  EXPECT_GT(g.value(), 0.050);
  EXPECT_LT(g.value(), 0.055);
  EXPECT_TRUE(judge(h, hp, ScalingFunction::sqrt_form(0.03), 0.05).disqualified);
  EXPECT_FALSE(judge(h, hp, ScalingFunction::sqrt_form(0.03), 0.055).disqualified);
}

TEST(BoundaryGammaTest, ZeroWhenAlternativeIsNotMoreBalanced) {
  const auto f = ScalingFunction::sqrt_form(0.1);
  EXPECT_EQ(boundary_gamma({0.2, 0.1}, {0.1, 0.2}, f), Gamma(0.0));
  EXPECT_EQ(boundary_gamma({0.2, 0.0}, {0.1, 0.0}, f), Gamma(0.0));
  EXPECT_EQ(boundary_gamma({0.2, 0.3}, {0.3, 0.1}, f, 0.25), Gamma(0.0));
}

TEST(BoundaryGammaTest, ExactFormIsZeroOrInfinite) {
  const auto f = ScalingFunction::exact();
  EXPECT_EQ(boundary_gamma({0.2, 0.3}, {0.3, 0.1}, f), Gamma(0.0));
  EXPECT_EQ(boundary_gamma({0.2, 0.3}, {0.2, 0.1}, f), Gamma::infinite());
}

TEST(MinimalGammaTest, BalancedModelGivesZero) {
  const FiniteDistribution p({{{}, Group::kS, 0.5, 0.4}, {{}, Group::kT, 0.5, 0.6}});
  const LabeledDataset& d = p.exact_dataset();
  const std::vector<double> s{0.5, 0.5};
  const PredictionVector h = p.expand(s);
  std::vector<PredictionVector> alts;
  for (double a : {0.0, 0.3, 0.9}) {
    for (double b : {0.0, 0.4, 1.0}) {
      const std::vector<double> v{a, b};
      alts.push_back(p.expand(v));
    }
  }
  const auto fam = ClassifierFamily::from_predictions(alts);
  const AuditReport r = minimal_gamma(h, fam, d, kSq, kZo, ScalingFunction::sqrt_form(0.2));
  EXPECT_EQ(r.gamma_hat, Gamma(0.0));
  EXPECT_TRUE(r.never_disqualified);
  EXPECT_FALSE(r.worst.has_value());
  ASSERT_TRUE(r.stats.has_value());
  EXPECT_NEAR(r.stats->eta, 0.2, 1e-15);
}

TEST(MinimalGammaTest, RejectsIllegalSeparable) {
  const Separable bad{PiecewiseLinear({0, 5, 6}, {0, 5, 5}), PiecewiseLinear::identity()};
  EXPECT_THROW(minimal_gamma_from_cards({0.1, 0.2}, {{0.2, 0.0}}, bad), ValidationError);
}

class DisqualificationPropertyTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{4242};
  std::uniform_real_distribution<double> unit_{0.0, 1.0};

  ScoreCard random_card() { return {unit_(rng_), 2.0 * unit_(rng_) - 1.0}; }
};

TEST_F(DisqualificationPropertyTest, ApproxWithZeroSlackIsExact) {
  FairnessParams p;
  for (int t = 0; t < 1000; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 20);
    const PredictionVector h = testing::random_predictions(rng_, d);
    const PredictionVector hp = testing::random_predictions(rng_, d);
    p.gamma = 3.0 * unit_(rng_);
    const auto f = ScalingFunction::sqrt_form(0.05 + 0.45 * unit_(rng_));
    const Verdict a = approx_disqualifies(hp, h, d, kSq, kZo, f, p);
    const Verdict e = disqualifies(hp, h, d, kSq, kZo, f, p.gamma);
    ASSERT_EQ(a.disqualified, e.disqualified);
    ASSERT_EQ(a.margin, e.margin);
    ASSERT_EQ(a.disqualified, a.margin > 0);
  }
}

TEST_F(DisqualificationPropertyTest, MonotoneInGamma) {
  const auto f = ScalingFunction::sqrt_form(0.1);
  for (int t = 0; t < 10000; ++t) {
    const ScoreCard h = random_card();
    const ScoreCard hp = random_card();
    const double g = 5.0 * unit_(rng_);
    const double g2 = g + 5.0 * unit_(rng_);
    if (judge(h, hp, f, g2).disqualified) {
      ASSERT_TRUE(judge(h, hp, f, g).disqualified);
    }
  }
}

TEST_F(DisqualificationPropertyTest, ClosedFormMatchesScan) {
  // Reference: disqualification holds just below the boundary and fails
  // just above it.
  for (int t = 0; t < 5000; ++t) {
    const ScoreCard h = random_card();
    const ScoreCard hp = random_card();
    const double eta = 0.01 + 0.49 * unit_(rng_);
    const double a1 = 0.1 * unit_(rng_);
    const double a2 = 0.1 * unit_(rng_);
    const auto f = ScalingFunction::sqrt_form(eta);
    const Gamma g = boundary_gamma(h, hp, f, a1, a2);
    if (g.is_infinite()) {
      ASSERT_TRUE(judge(h, hp, f, 1e12, a1, a2).disqualified);
      continue;
    }
    if (g.value() == 0.0) {
      ASSERT_FALSE(judge(h, hp, f, 1e-12, a1, a2).disqualified);
      continue;
    }
    ASSERT_TRUE(judge(h, hp, f, g.value() * (1 - 1e-6), a1, a2).disqualified);
    ASSERT_FALSE(judge(h, hp, f, g.value() * (1 + 1e-6), a1, a2).disqualified);
  }
}

TEST_F(DisqualificationPropertyTest, BisectionAgreesWithClosedForm) {
  // A separable table equal to the square-root form with eta = 1/2 on
  // gamma, linear in a. Compare bisection against an explicit formula.
  const Separable lin{PiecewiseLinear({0, 1}, {0, 2}), PiecewiseLinear::identity()};
  const ScalingFunction f(lin);
  for (int t = 0; t < 2000; ++t) {
    const ScoreCard h = random_card();
    const ScoreCard hp = random_card();
    const Gamma g = boundary_gamma(h, hp, f);
    const double gap = imbalance_reduction(h, hp);
    const double a = std::max(0.0, hp.loss_a - h.loss_a);
    if (gap <= 0) {
      ASSERT_EQ(g, Gamma(0.0));
    } else if (a == 0.0) {
      ASSERT_TRUE(g.is_infinite());
    } else {
      // 2 gamma a = gap at the boundary.
      const double ref = gap / (2.0 * a);
      ASSERT_NEAR(g.value(), ref, 2e-9 * std::max(1.0, ref));
    }
  }
}

TEST_F(DisqualificationPropertyTest, GammaHatDominatesEveryThreshold) {
  const auto f = ScalingFunction::sqrt_form(0.2);
  for (int t = 0; t < 300; ++t) {
    const ScoreCard h = random_card();
    std::vector<ScoreCard> alts(1 + t % 30);
    for (auto& c : alts) c = random_card();
    const AuditReport r = minimal_gamma_from_cards(h, alts, f);
    for (const Gamma& g : r.thresholds) ASSERT_LE(g, r.gamma_hat);
    ASSERT_EQ(r.never_disqualified, r.gamma_hat == Gamma(0.0));
    if (r.worst) {
      ASSERT_EQ(r.thresholds[*r.worst], r.gamma_hat);
    }
  }
}

}  // namespace
}  // namespace gamma_audit
