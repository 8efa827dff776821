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

#include <gtest/gtest.h>

#include "meritopt/verify.h"

namespace meritopt {
namespace {

std::vector<DataSource> iid_group(int n, Eigen::Index d, double noise = 1.0) {
  std::vector<DataSource> g;
  for (int i = 0; i < n; ++i) {
    g.push_back(make_gaussian_source("G" + std::to_string(i), d, MeanSpec::zero(), 5000,
                                     40 + i, noise));
    g.back().target_distribution = true;
  }
  return g;
}

TEST(PairwiseSumTest, MatchesNaiveOnSmallIntegers) {
  std::vector<double> v(1001);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  EXPECT_EQ(pairwise_sum(v), 500500.0);
  EXPECT_EQ(pairwise_sum({}), 0.0);
}

TEST(VarianceBoundTest, SingleSourceRatioIsOne) {
  const LossModel m(ModelKind::kMeanEstimation, 8);
  VarianceCheckOptions o;
  const VerificationReport r = check_variance_bound(iid_group(1, 8), m, Vector::Zero(8), o);
  const double ratio = *r.get("mse_over_sigma_sq");
  EXPECT_GE(ratio, 0.8);
  EXPECT_LE(ratio, 1.2);
  EXPECT_TRUE(r.pass);
}

TEST(VarianceBoundTest, FourSourcesQuarterVariance) {
  const LossModel m(ModelKind::kMeanEstimation, 8);
  VarianceCheckOptions o;
  const VerificationReport r = check_variance_bound(iid_group(4, 8), m, Vector::Zero(8), o);
  const double ratio = *r.get("mse_over_sigma_sq");
  EXPECT_GE(ratio, 0.2);
  EXPECT_LE(ratio, 0.3);
  EXPECT_NEAR(*r.get("sigma_sq"), 4.0 * 8, 0.1 * 4.0 * 8);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.trials, 10000);
}

TEST(VarianceBoundTest, ScaleAware) {
  const LossModel m(ModelKind::kMeanEstimation, 6);
  VarianceCheckOptions o;
  const double s1 =
      *check_variance_bound(iid_group(2, 6), m, Vector::Zero(6), o).get("sigma_sq");
  const double s2 =
      *check_variance_bound(iid_group(2, 6, 2.0), m, Vector::Zero(6), o).get("sigma_sq");
  EXPECT_NEAR(s2 / s1, 4.0, 0.8);
}

TEST(VarianceBoundTest, Reproducible) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  VarianceCheckOptions o;
  o.trials = 2000;
  const auto a = check_variance_bound(iid_group(3, 4), m, Vector::Zero(4), o);
  const auto b = check_variance_bound(iid_group(3, 4), m, Vector::Zero(4), o);
  EXPECT_EQ(a.quantities, b.quantities);
}

TEST(VarianceBoundTest, Preconditions) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  auto g = iid_group(2, 4);
  VarianceCheckOptions o;
  o.trials = 999;
  EXPECT_THROW(check_variance_bound(g, m, Vector::Zero(4), o), std::invalid_argument);
  o.trials = 1000;
  g[1].target_distribution = false;
  EXPECT_THROW(check_variance_bound(g, m, Vector::Zero(4), o), std::invalid_argument);
}

TEST(SimplexGridTest, CountsAndMembership) {
  EXPECT_EQ(simplex_grid(3, 0.01).size(), 5151u);
  EXPECT_EQ(simplex_grid(4, 0.025).size(), 12341u);
  EXPECT_EQ(simplex_grid(1, 0.1).size(), 1u);
  for (const auto& w : simplex_grid(3, 0.1)) EXPECT_TRUE(on_simplex(w));
  EXPECT_THROW(simplex_grid(5, 0.1), std::invalid_argument);
}

PhiSnapshot snapshot() {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  const DataSource a = make_gaussian_source("a", 5, MeanSpec::zero(), 50, 1);
  const DataSource b = make_gaussian_source("b", 5, MeanSpec::scaled_ones(0.3), 50, 2);
  const DataSource c = make_gaussian_source("c", 5, MeanSpec::random_unit(3), 50, 3);
  const DataSource v = make_gaussian_source("v", 5, MeanSpec::zero(), 40, 4);
  PhiSnapshot s{Vector::Constant(5, 1.0), {}, 0.1,
                OptimizerState(OptimizerKind::kSgd, {}, 5), v.samples, {0}};
  for (const auto* src : {&a, &b, &c}) s.grads.push_back(m.gradient(src->samples, s.x));
  return s;
}

TEST(EstimateDeltaTest, ZeroIterationsIsUniformGap) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  const PhiSnapshot s = snapshot();
  MdConfig md;
  md.iterations = 0;
  const VerificationReport r = estimate_delta(s, m, md, 0.01);
  const PhiProblem p(s.x, s.grads, s.step_size, s.state, m);
  EXPECT_EQ(*r.get("phi_smd"), phi_value(p, WeightVector::uniform(3), s.val_batch));
  EXPECT_GE(*r.get("delta_hat"), 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(EstimateDeltaTest, MoreIterationsNeverWorse) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  const PhiSnapshot s = snapshot();
  MdConfig md;
  md.eta = 0.1;
  md.iterations = 5;
  const double d5 = *estimate_delta(s, m, md, 0.01).get("delta_hat");
  md.iterations = 100;
  const double d100 = *estimate_delta(s, m, md, 0.01).get("delta_hat");
  EXPECT_LE(d100, d5 + 1e-12);
}

TEST(EstimateDeltaTest, GridMinBelowIdeal) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  const PhiSnapshot s = snapshot();
  const VerificationReport r = estimate_delta(s, m, MdConfig{}, 0.01);
  EXPECT_LE(*r.get("grid_min"), *r.get("phi_ideal"));
  EXPECT_GE(*r.get("delta_hat"), -*r.get("smd_grid_slack"));
  EXPECT_TRUE(r.pass);
}

std::vector<TrajectoryRecord> quadratic_run(int steps) {
  DataSource target = make_gaussian_source("t", 20, MeanSpec::zero(), 20, 11);
  target.role = SourceRole::kTargetTrain;
  DataSource val = target;
  val.role = SourceRole::kTargetValidation;
  TrainConfig c;
  c.steps = steps;
  c.mode = TrainMode::kTargetOnly;
  c.batch = FixedBatch{{}, 1.0, 0};
  c.x0 = Vector::Constant(20, 1.0);
  return run(c, {target}, val, LossModel(ModelKind::kMeanEstimation, 20)).records;
}

TEST(NeighborhoodTest, DeterministicQuadraticConverges) {
  const auto records = quadratic_run(2000);
  EXPECT_LE(records.back().grad_norm, 1e-6);
  NeighborhoodOptions o;
  o.sigma_star_sq = 0.0;
  o.delta_hat = 0.0;
  o.gamma = 0.1;
  const VerificationReport r = check_neighborhood_convergence(records, o);
  EXPECT_TRUE(r.pass);
}

TEST(NeighborhoodTest, RunningMinimumIsMonotone) {
  std::vector<TrajectoryRecord> records(200);
  for (std::size_t k = 0; k < records.size(); ++k) {
    records[k].step = static_cast<int>(k + 1);
    records[k].grad_norm = 1.0 + std::sin(0.3 * static_cast<double>(k));
  }
  const VerificationReport r = check_neighborhood_convergence(records, {});
  const auto& run_min = r.series.at("running_min_grad_norm");
  for (std::size_t k = 1; k < run_min.size(); ++k) EXPECT_LE(run_min[k], run_min[k - 1]);
  EXPECT_TRUE(r.pass);
}

TEST(NeighborhoodTest, LongerRunNeverRaisesMinimum) {
  const auto short_run = quadratic_run(100);
  const auto long_run = quadratic_run(200);
  const auto a = check_neighborhood_convergence(short_run, {});
  const auto b = check_neighborhood_convergence(long_run, {});
  EXPECT_LE(*b.get("min_grad_norm_full"), *a.get("min_grad_norm_full"));
}

TEST(NeighborhoodTest, InsufficientRecords) {
  EXPECT_THROW(check_neighborhood_convergence({}, {}), std::invalid_argument);
}

TEST(OptimizerInvariantsTest, AdaGradUnitStream) {
  OptimizerCheckOptions o;
  o.stream = OptimizerCheckOptions::Stream::kUnitNorm;
  o.steps = 10000;
  o.emit_series = true;
  const VerificationReport r = check_optimizer_invariants(OptimizerKind::kAdaGradNorm, {}, o);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(*r.get("b_closed_form_max_abs_dev"), 0.0);
  ASSERT_EQ(r.series.at("b").size(), 10000u);
  EXPECT_EQ(r.series.at("b").back(), std::sqrt(10001.0));
}

TEST(OptimizerInvariantsTest, RmsPropBoundedStream) {
  OptimizerCheckOptions o;
  o.stream = OptimizerCheckOptions::Stream::kBounded;
  o.bound = 3.0;
  o.steps = 1000;
  OptimizerHyper h;
  h.eps = 1e-3;
  const VerificationReport r = check_optimizer_invariants(OptimizerKind::kRmsProp, h, o);
  EXPECT_TRUE(r.pass);
  EXPECT_GE(*r.get("min_divisor"), 1e-3);
  EXPECT_LE(*r.get("max_displacement_over_cap"), 1.0);
  EXPECT_LE(*r.get("max_abs_grad_component"), 3.0);
}

TEST(OptimizerInvariantsTest, ZeroStreamLeavesXFixed) {
  OptimizerCheckOptions o;
  o.stream = OptimizerCheckOptions::Stream::kZero;
  o.steps = 100;
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kAdam, OptimizerKind::kRmsProp,
                 OptimizerKind::kAdaGradNorm}) {
    const VerificationReport r = check_optimizer_invariants(k, {}, o);
    EXPECT_TRUE(r.pass) << to_string(k);
    EXPECT_EQ(*r.get("zero_stream_displacement"), 0.0);
  }
}

TEST(OptimizerInvariantsTest, TooFewSteps) {
  OptimizerCheckOptions o;
  o.steps = 99;
  EXPECT_THROW(check_optimizer_invariants(OptimizerKind::kSgd, {}, o),
               std::invalid_argument);
}

}  // namespace
}  // namespace meritopt
