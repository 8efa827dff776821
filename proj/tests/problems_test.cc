// Copyright 2026 The MeritOpt Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "meritopt/problems.h"
#include "meritopt/sources.h"

namespace meritopt {
namespace {

DataSource source_for(ModelKind kind, Eigen::Index dim, std::uint64_t seed,
                      Eigen::Index size = 30) {
  switch (kind) {
    case ModelKind::kMeanEstimation:
      return make_gaussian_source("g", dim, MeanSpec::random_unit(seed), size, seed);
    case ModelKind::kLinearRegression:
      return make_regression_source("r", dim, MeanSpec::random_unit(seed), size, seed, 0.3);
    case ModelKind::kLogisticRegression:
      return make_classification_source("c", dim, MeanSpec::random_unit(seed), size, seed);
  }
  return {};
}

TEST(LossModelTest, StringRoundTrip) {
  for (auto k : {ModelKind::kMeanEstimation, ModelKind::kLinearRegression,
                 ModelKind::kLogisticRegression}) {
    EXPECT_EQ(model_kind_from_string(to_string(k)), k);
  }
  EXPECT_THROW(model_kind_from_string("svm"), std::invalid_argument);
}

TEST(LossModelTest, MeanEstimationAtSampleIsZero) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  SampleSet b(1, 3);
  b << 0.5, -1.0, 2.0;
  EXPECT_EQ(m.loss(b, b.row(0).transpose()), 0.0);
}

TEST(LossModelTest, MeanEstimationPopulationLossIsDim) {
  const Eigen::Index d = 20;
  const LossModel m(ModelKind::kMeanEstimation, d);
  const DataSource s = make_gaussian_source("g", d, MeanSpec::zero(), 100000, 11);
  const double band = 4.0 * std::sqrt(2.0 * d) / std::sqrt(1e5);
  EXPECT_NEAR(m.loss(s.samples, Vector::Zero(d)), static_cast<double>(d), band);
}

TEST(LossModelTest, NoiselessRegressionAtTruthIsZero) {
  const LossModel m(ModelKind::kLinearRegression, 4);
  const DataSource s =
      make_regression_source("r", 4, MeanSpec::scaled_ones(0.7), 50, 3, 0.0);
  EXPECT_NEAR(m.loss(s.samples, s.params.location), 0.0, 1e-28);
}

TEST(LossModelTest, GradientAtBatchMeanIsZero) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  const DataSource s = make_gaussian_source("g", 5, MeanSpec::zero(), 12, 4);
  const Vector mean = s.samples.colwise().mean().transpose();
  EXPECT_LT(m.gradient(s.samples, mean).norm(), 1e-14);
}

TEST(LossModelTest, HandEvaluatedGradient) {
  const LossModel m(ModelKind::kMeanEstimation, 2);
  SampleSet b(1, 2);
  b << 1.0, 0.0;
  const Vector g = m.gradient(b, Vector::Zero(2));
  EXPECT_EQ(g[0], -2.0);
  EXPECT_EQ(g[1], 0.0);
}

TEST(LossModelTest, DimensionMismatchThrows) {
  const LossModel m(ModelKind::kLinearRegression, 3);
  EXPECT_THROW(m.loss(SampleSet::Zero(2, 3), Vector::Zero(3)), std::invalid_argument);
  EXPECT_THROW(m.gradient(SampleSet::Zero(2, 4), Vector::Zero(2)), std::invalid_argument);
  EXPECT_THROW(m.loss(SampleSet::Zero(0, 4), Vector::Zero(3)), std::invalid_argument);
}

TEST(LossModelTest, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n01;
  const double h = 1e-6;
  for (auto kind : {ModelKind::kMeanEstimation, ModelKind::kLinearRegression,
                    ModelKind::kLogisticRegression}) {
    for (int trial = 0; trial < 100; ++trial) {
      const Eigen::Index d = 1 + trial % 6;
      const LossModel m(kind, d);
      const DataSource s = source_for(kind, d, static_cast<std::uint64_t>(trial), 8);
      Vector x(d);
      for (auto& v : x) v = n01(rng);
      const Vector g = m.gradient(s.samples, x);
      Vector fd(d);
      for (Eigen::Index j = 0; j < d; ++j) {
        Vector xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        fd[j] = (m.loss(s.samples, xp) - m.loss(s.samples, xm)) / (2 * h);
      }
      const double scale = std::max(1.0, g.norm());
      ASSERT_LT((g - fd).norm() / scale, 1e-5)
          << to_string(kind) << " trial " << trial;
    }
  }
}

TEST(LossModelTest, SingleSampleGradientVarianceIsFourD) {
  const Eigen::Index d = 10;
  const LossModel m(ModelKind::kMeanEstimation, d);
  const DataSource s = make_gaussian_source("g", d, MeanSpec::zero(), 100000, 21);
  const Vector x = Vector::Constant(d, 0.3);
  const Vector mean_g = m.gradient(s.samples, x);
  double acc = 0.0;
  for (Eigen::Index r = 0; r < s.size(); ++r) {
    acc += (m.gradient(s.samples.row(r), x) - mean_g).squaredNorm();
  }
  EXPECT_NEAR(acc / static_cast<double>(s.size()), 4.0 * d, 0.1 * 4.0 * d);
}

TEST(LossModelTest, ConvexAlongSegments) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (auto kind : {ModelKind::kMeanEstimation, ModelKind::kLinearRegression}) {
    for (int trial = 0; trial < 100; ++trial) {
      const LossModel m(kind, 4);
      const DataSource s = source_for(kind, 4, static_cast<std::uint64_t>(trial), 10);
      Vector a(4), b(4);
      for (auto& v : a) v = 3 * n01(rng);
      for (auto& v : b) v = 3 * n01(rng);
      const double mid = m.loss(s.samples, 0.5 * (a + b));
      ASSERT_LE(mid, 0.5 * (m.loss(s.samples, a) + m.loss(s.samples, b)) + 1e-12);
    }
  }
}

TEST(ClosedFormTest, StandardGaussian) {
  const LossModel m(ModelKind::kMeanEstimation, 20);
  const Optimum o = m.closed_form_optimum(make_gaussian_source("g", 20, MeanSpec::zero(), 5, 1));
  EXPECT_EQ(o.x, Vector::Zero(20));
  EXPECT_EQ(o.value, 20.0);
}

TEST(ClosedFormTest, ShiftedGaussian) {
  const LossModel m(ModelKind::kMeanEstimation, 6);
  const Optimum o =
      m.closed_form_optimum(make_gaussian_source("g", 6, MeanSpec::scaled_ones(1e-4), 5, 1));
  EXPECT_EQ(o.x, Vector::Constant(6, 1e-4));
  EXPECT_EQ(o.value, 6.0);
}

TEST(ClosedFormTest, NoiselessRegression) {
  const LossModel m(ModelKind::kLinearRegression, 3);
  const DataSource s = make_regression_source("r", 3, MeanSpec::random_unit(2), 5, 1, 0.0);
  const Optimum o = m.closed_form_optimum(s);
  EXPECT_EQ(o.x, s.params.location);
  EXPECT_EQ(o.value, 0.0);
}

TEST(ClosedFormTest, UnsupportedThrows) {
  const LossModel m(ModelKind::kLogisticRegression, 3);
  EXPECT_THROW(m.closed_form_optimum(source_for(ModelKind::kLogisticRegression, 3, 1)),
               std::invalid_argument);
}

}  // namespace
}  // namespace meritopt
