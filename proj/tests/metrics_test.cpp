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

#include "gamma_audit/metrics.hpp"

#include <gtest/gtest.h>

#include <random>

#include "gamma_audit/pareto.hpp"
#include "test_util.hpp"

namespace gamma_audit {
namespace {

using testing::four_rows;
using testing::Naive;

constexpr LossKind kSq = LossKind::kSquared;
constexpr LossKind kZo = LossKind::kExpectedZeroOne;

TEST(LossTest, HandValues) {
  const LabeledDataset d = four_rows();
  EXPECT_EQ(loss(kSq, PredictionVector(d, {1, 0, 1, 0}), d), 0.0);
  EXPECT_DOUBLE_EQ(loss(kZo, PredictionVector(d, {.5, .5, .5, .5}), d), 0.5);
  EXPECT_DOUBLE_EQ(loss(kSq, PredictionVector(d, {.5, .5, .5, .5}), d), 0.25);
}

TEST(LossTest, BindingMismatchThrows) {
  const LabeledDataset d = four_rows();
  const PredictionVector h(four_rows(), {0, 0, 0, 0});
  EXPECT_THROW(loss(kSq, h, d), BindingError);
}

TEST(PsiTest, HandValues) {
  const LabeledDataset d = four_rows();
  EXPECT_EQ(psi(kZo, PredictionVector(d, {1, .3, 1, .3}), d, Group::kS), 0.0);
  EXPECT_DOUBLE_EQ(psi(kZo, PredictionVector(d, {.5, 0, .5, 0}), d, Group::kT), 0.5);
  EXPECT_NEAR(psi(kSq, PredictionVector(d, {.8, 0, .8, 0}), d, Group::kS), 0.04, 1e-15);
}

TEST(PsiTest, NoPositivesThrows) {
  const LabeledDataset d({{{0.0}, Group::kS, 0}, {{0.0}, Group::kT, 1}});
  EXPECT_THROW(psi(kZo, PredictionVector(d, {0, 0}), d, Group::kS),
               MissingPositivesError);
}

TEST(ImbalanceTest, FixtureValuesAndAntisymmetry) {
  const LabeledDataset d = four_rows();
  const PredictionVector h(d, {0.5, 0.0, 1.0, 0.0});
  EXPECT_DOUBLE_EQ(directed_loss_imbalance(kZo, h, d, Direction::kTtoS), 0.5);
  EXPECT_DOUBLE_EQ(directed_loss_imbalance(kZo, h, d, Direction::kStoT), -0.5);
  EXPECT_DOUBLE_EQ(imbalance(h, d, Direction::kTtoS), 0.5);
  const PredictionVector balanced(d, {0.7, 0.1, 0.7, 0.9});
  EXPECT_EQ(directed_loss_imbalance(kZo, balanced, d, Direction::kTtoS), 0.0);
  EXPECT_EQ(imbalance(PredictionVector(d, {1, 0, 1, 0}), d, Direction::kTtoS), 0.0);
}

TEST(GroupStatsTest, Eta) {
  // 50/50 groups with base rates 0.2 and 0.8.
  std::vector<Row> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({{}, Group::kS, i < 2 ? 1 : 0});
  for (int i = 0; i < 10; ++i) rows.push_back({{}, Group::kT, i < 8 ? 1 : 0});
  const GroupStats s = group_stats(LabeledDataset(rows));
  EXPECT_DOUBLE_EQ(s.eta, 0.1);
  EXPECT_DOUBLE_EQ(s.beta_s, 0.2);
  EXPECT_DOUBLE_EQ(s.mu_min * s.beta_min, 0.1);
}

TEST(GroupStatsTest, SymmetricGroupsGiveHalfBaseRate) {
  std::vector<Row> rows;
  for (Group g : {Group::kS, Group::kT}) {
    for (int i = 0; i < 8; ++i) rows.push_back({{}, g, i < 3 ? 1 : 0});
  }
  EXPECT_DOUBLE_EQ(group_stats(LabeledDataset(rows)).eta, 3.0 / 8.0 / 2.0);
}

TEST(GroupStatsTest, MinorityPositives) {
  // 30% minority with a 10% base rate; the majority has 40%.
  std::vector<Row> rows;
  for (int i = 0; i < 1000; ++i) {
    const bool s = i < 300;
    const int y = s ? (i < 30 ? 1 : 0) : (i < 580 ? 1 : 0);
    rows.push_back({{}, s ? Group::kS : Group::kT, y});
  }
  EXPECT_NEAR(group_stats(LabeledDataset(rows)).eta, 0.03, 1e-15);
}

class MetricsPropertyTest : public ::testing::Test {
 protected:
  std::mt19937_64 rng_{20260101};
};

TEST_F(MetricsPropertyTest, MatchNaiveReference) {
  for (int t = 0; t < 300; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 5 + t % 40);
    const PredictionVector h = testing::random_predictions(rng_, d);
    const Naive n = Naive::of(d, h);
    ASSERT_NEAR(loss(kSq, h, d), n.squared(), 1e-12);
    ASSERT_NEAR(loss(kZo, h, d), n.zero_one(), 1e-12);
    ASSERT_NEAR(imbalance(h, d, Direction::kTtoS),
                n.positive_mean(1) - n.positive_mean(0), 1e-12);
    ASSERT_NEAR(directed_loss_imbalance(kSq, h, d, Direction::kTtoS),
                n.positive_squared(0) - n.positive_squared(1), 1e-12);
  }
}

TEST_F(MetricsPropertyTest, ZeroOneImbalanceIsScoreGap) {
  for (int t = 0; t < 2000; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 2 + t % 50);
    const PredictionVector h = testing::random_predictions(rng_, d);
    for (Direction dir : {Direction::kTtoS, Direction::kStoT}) {
      ASSERT_LE(std::abs(imbalance(h, d, dir) - directed_loss_imbalance(kZo, h, d, dir)),
                1e-12);
      ASSERT_EQ(directed_loss_imbalance(kSq, h, d, dir),
                -directed_loss_imbalance(kSq, h, d, reverse(dir)));
    }
  }
}

TEST_F(MetricsPropertyTest, ImbalanceIsLinearInMixtures) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 30);
    const PredictionVector a = testing::random_predictions(rng_, d);
    const PredictionVector b = testing::random_predictions(rng_, d);
    const double w = unit(rng_);
    const auto fam = make_family({a, b});
    const PredictionVector m = mixture_predictions(Mixture(fam, {w, 1 - w}), d);
    ASSERT_NEAR(imbalance(m, d, Direction::kTtoS),
                w * imbalance(a, d, Direction::kTtoS) +
                    (1 - w) * imbalance(b, d, Direction::kTtoS),
                1e-12);
  }
}

TEST_F(MetricsPropertyTest, SquaredLossIsMidpointConvexInWeights) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int t = 0; t < 300; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 25);
    const auto fam = make_family({testing::random_predictions(rng_, d),
                                  testing::random_predictions(rng_, d),
                                  testing::random_predictions(rng_, d)});
    auto rand_w = [&] {
      double x = unit(rng_), y = unit(rng_), z = unit(rng_);
      const double s = x + y + z;
      return std::vector<double>{x / s, y / s, 1.0 - x / s - y / s};
    };
    const auto u = rand_w();
    const auto v = rand_w();
    std::vector<double> mid(3);
    for (int j = 0; j < 3; ++j) mid[j] = 0.5 * (u[j] + v[j]);
    auto l = [&](const std::vector<double>& w) {
      return loss(kSq, mixture_predictions(Mixture(fam, w), d), d);
    };
    ASSERT_LE(l(mid), 0.5 * (l(u) + l(v)) + 1e-12);
    // The quadratic form agrees with direct evaluation.
    const MixtureObjective q = mixture_objective(*fam, d, kSq);
    Eigen::Vector3d w(u[0], u[1], u[2]);
    ASSERT_NEAR(evaluate(q, w), l(u), 1e-12);
  }
}

TEST_F(MetricsPropertyTest, RangesHold) {
  for (int t = 0; t < 10000; ++t) {
    const LabeledDataset d = testing::random_dataset(rng_, 2 + t % 20);
    const PredictionVector h = testing::random_predictions(rng_, d);
    for (LossKind k : {kSq, kZo}) {
      const double l = loss(k, h, d);
      ASSERT_GE(l, 0.0);
      ASSERT_LE(l, 1.0);
      const double im = directed_loss_imbalance(k, h, d, Direction::kTtoS);
      ASSERT_GE(im, -1.0);
      ASSERT_LE(im, 1.0);
    }
  }
}

}  // namespace
}  // namespace gamma_audit
