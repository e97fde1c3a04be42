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

#include "gamma_audit/types.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "gamma_audit/metrics.hpp"
#include "test_util.hpp"

namespace gamma_audit {
namespace {

using testing::four_rows;

TEST(GammaTest, InfinityIsFirstClass) {
  const Gamma inf = Gamma::infinite();
  EXPECT_TRUE(inf.is_infinite());
  EXPECT_FALSE(Gamma(1e300).is_infinite());
  EXPECT_GT(inf, Gamma(1e300));
  EXPECT_EQ(Gamma(std::numeric_limits<double>::infinity()), inf);
}

TEST(GammaTest, RejectsNegativeAndNan) {
  EXPECT_THROW(Gamma(-0.1), ValidationError);
  EXPECT_THROW(Gamma(std::nan("")), ValidationError);
}

TEST(LabeledDatasetTest, RejectsBadRows) {
  EXPECT_THROW(LabeledDataset({}), ValidationError);
  EXPECT_THROW(LabeledDataset({{{0.0}, Group::kS, 2}}), ValidationError);
  EXPECT_THROW(LabeledDataset({{{0.0}, Group::kS, 1}, {{0.0, 1.0}, Group::kT, 1}}),
               ValidationError);
  EXPECT_THROW(LabeledDataset({{{0.0}, Group::kS, 1}}, {-1.0}), ValidationError);
}

TEST(LabeledDatasetTest, CountsAndPositives) {
  const LabeledDataset d = four_rows();
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.count(Group::kS), 2u);
  EXPECT_EQ(d.count(Group::kT, 1), 1u);
  EXPECT_NO_THROW(d.require_positives());
  const LabeledDataset only_s({{{0.0}, Group::kS, 1}});
  EXPECT_THROW(only_s.require_positives(), MissingPositivesError);
}

TEST(LabeledDatasetTest, IdsAreUnique) {
  EXPECT_NE(four_rows().id(), four_rows().id());
}

TEST(PredictionVectorTest, BindingAndRange) {
  const LabeledDataset d = four_rows();
  EXPECT_THROW(PredictionVector(d, {0.1, 0.2}), BindingError);
  EXPECT_THROW(PredictionVector(d, {0.1, 0.2, 1.3, 0.0}), ValidationError);
  const PredictionVector h(d, {0.1, 0.2, 0.3, 0.4});
  EXPECT_TRUE(h.bound_to(d));
  EXPECT_FALSE(h.bound_to(four_rows()));
}

TEST(MixtureTest, WeightsMustFormADistribution) {
  const LabeledDataset d = four_rows();
  auto fam = make_family({PredictionVector(d, {0, 0, 0, 0}),
                          PredictionVector(d, {1, 1, 1, 1})});
  EXPECT_THROW(Mixture(fam, {0.5}), ValidationError);
  EXPECT_THROW(Mixture(fam, {0.6, 0.6}), ValidationError);
  EXPECT_THROW(Mixture(fam, {1.2, -0.2}), ValidationError);
  EXPECT_NO_THROW(Mixture(fam, {0.3, 0.7}));
}

TEST(MixtureTest, PredictionsAreEntrywiseCombinations) {
  const LabeledDataset d = four_rows();
  auto fam = make_family({PredictionVector(d, {0.0, 0.2, 0.4, 1.0}),
                          PredictionVector(d, {1.0, 0.6, 0.0, 0.0})});
  const PredictionVector m = mixture_predictions(Mixture(fam, {0.25, 0.75}), d);
  EXPECT_DOUBLE_EQ(m[0], 0.75);
  EXPECT_DOUBLE_EQ(m[1], 0.5);
  EXPECT_DOUBLE_EQ(m[2], 0.1);
  EXPECT_DOUBLE_EQ(m[3], 0.25);
}

TEST(MixtureTest, FamilyOnOtherDatasetIsRejected) {
  const LabeledDataset d = four_rows();
  const LabeledDataset other = four_rows();
  auto fam = make_family({PredictionVector(d, {0, 0, 0, 0})});
  EXPECT_THROW(mixture_predictions(Mixture::vertex(fam, 0), other), BindingError);
}

TEST(FiniteDistributionTest, ExactDatasetCarriesMasses) {
  const FiniteDistribution p({{{0.0}, Group::kS, 0.4, 0.25},
                              {{1.0}, Group::kT, 0.6, 1.0}});
  const LabeledDataset& d = p.exact_dataset();
  ASSERT_EQ(d.size(), 4u);
  EXPECT_DOUBLE_EQ(d.weight(0), 0.1);
  EXPECT_DOUBLE_EQ(d.weight(1), 0.3);
  EXPECT_DOUBLE_EQ(d.weight(2), 0.6);
  EXPECT_DOUBLE_EQ(d.weight(3), 0.0);
  const GroupStats s = group_stats(d);
  EXPECT_DOUBLE_EQ(s.mu_s, 0.4);
  EXPECT_DOUBLE_EQ(s.beta_s, 0.25);
  EXPECT_DOUBLE_EQ(s.eta, 0.1);
}

TEST(FiniteDistributionTest, RejectsBadMasses) {
  EXPECT_THROW(FiniteDistribution({{{}, Group::kS, 0.5, 0.5}}), ValidationError);
  EXPECT_THROW(FiniteDistribution({{{}, Group::kS, 1.0, 1.5}}), ValidationError);
}

TEST(FiniteDistributionTest, SamplingIsDeterministicAndConcentrates) {
  const FiniteDistribution p({{{}, Group::kS, 0.5, 0.2}, {{}, Group::kT, 0.5, 0.8}});
  const LabeledDataset a = dataset_from_distribution(p, 20000, 9);
  const LabeledDataset b = dataset_from_distribution(p, 20000, 9);
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(a.group(i), b.group(i));
    ASSERT_EQ(a.label(i), b.label(i));
  }
  const GroupStats s = group_stats(a);
  EXPECT_NEAR(s.beta_s, 0.2, 0.02);
  EXPECT_NEAR(s.beta_t, 0.8, 0.02);
}

TEST(FiniteDistributionTest, SingleSupportSampleHasOneGroup) {
  const FiniteDistribution p({{{}, Group::kT, 1.0, 1.0}});
  const LabeledDataset d = dataset_from_distribution(p, 5, 1);
  EXPECT_EQ(d.count(Group::kT, 1), 5u);
  EXPECT_THROW(d.require_positives(), MissingPositivesError);
}

}  // namespace
}  // namespace gamma_audit
