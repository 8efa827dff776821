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

#include "meritopt/weight_solver.h"
#include "oracles.h"

namespace meritopt {
namespace {

struct Instance {
  Vector x;
  std::vector<Vector> grads;
  SampleSet val;
  double gamma = 0.1;
};

Instance random_instance(std::mt19937_64& rng, Eigen::Index d, std::size_t n) {
  std::normal_distribution<double> n01;
  Instance in;
  in.x = Vector(d);
  for (auto& v : in.x) v = n01(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Vector g(d);
    for (auto& v : g) v = 2 * n01(rng);
    in.grads.push_back(g);
  }
  in.val = SampleSet(8, d);
  for (Eigen::Index r = 0; r < in.val.rows(); ++r) {
    for (Eigen::Index c = 0; c < d; ++c) in.val(r, c) = n01(rng);
  }
  in.gamma = std::uniform_real_distribution<double>(0.01, 0.3)(rng);
  return in;
}

// x sits 5 units from the validation mean along u; g1 points along the
// gradient, g2 and g3 are orthogonal to it.
Instance aligned_instance() {
  const Eigen::Index d = 6;
  Instance in;
  in.gamma = 0.1;
  in.val = SampleSet::Zero(4, d);
  in.val.row(0)(1) = 1.0;
  in.val.row(1)(1) = -1.0;
  in.val.row(2)(2) = 1.0;
  in.val.row(3)(2) = -1.0;  // mean zero
  Vector u = Vector::Zero(d);
  u[0] = 1.0;
  in.x = 5.0 * u;
  Vector g2 = Vector::Zero(d), g3 = Vector::Zero(d);
  g2[3] = 4.0;
  g3[4] = -3.0;
  g3[5] = 2.0;
  in.grads = {10.0 * u, g2, g3};
  return in;
}

TEST(MdConfigTest, Validation) {
  MdConfig c;
  EXPECT_NO_THROW(validate(c));
  c.eta = -1.0;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.iterations = -1;
  EXPECT_THROW(validate(c), std::invalid_argument);
  c = {};
  c.val_batch_size = 0;
  EXPECT_THROW(validate(c), std::invalid_argument);
}

TEST(MdConfigTest, Defaults) {
  const MdConfig c;
  EXPECT_EQ(c.eta, 0.1);
  EXPECT_EQ(c.iterations, 5);
  EXPECT_EQ(c.grad_mode, PhiGradMode::kFiniteDifference);
  EXPECT_FALSE(c.warm_start);
  EXPECT_FALSE(c.resample_val_per_iter);
}

TEST(PhiValueTest, SingleSourceEqualsPlainStep) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  std::mt19937_64 rng(1);
  const Instance in = random_instance(rng, 3, 1);
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kAdam, OptimizerKind::kRmsProp,
                 OptimizerKind::kAdaGradNorm}) {
    const OptimizerState s(k, {}, 3);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    OptimizerState plain = s;
    const Vector xp = opt_step(plain, in.x, in.grads[0], in.gamma);
    EXPECT_EQ(phi_value(p, WeightVector({1.0}), in.val), m.loss(in.val, xp));
  }
}

TEST(PhiValueTest, ZeroStepSizeIsCurrentLoss) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  std::mt19937_64 rng(2);
  const Instance in = random_instance(rng, 4, 3);
  const OptimizerState s(OptimizerKind::kSgd, {}, 4);
  const PhiProblem p(in.x, in.grads, 0.0, s, m);
  for (const auto& w : {WeightVector::uniform(3), WeightVector::vertex(3, 2),
                        WeightVector({0.2, 0.7, 0.1})}) {
    EXPECT_EQ(phi_value(p, w, in.val), m.loss(in.val, in.x));
  }
  EXPECT_EQ(phi_gradient(p, WeightVector::uniform(3), in.val, PhiGradMode::kAnalyticFrozen),
            Vector::Zero(3));
}

TEST(PhiValueTest, LeavesInputsUntouched) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  std::mt19937_64 rng(3);
  const Instance in = random_instance(rng, 3, 2);
  OptimizerState s(OptimizerKind::kAdam, {}, 3);
  adam_step(s, in.x, in.grads[0], 0.1);
  const OptimizerState before = s;
  const Vector x_before = in.x;
  const PhiProblem p(in.x, in.grads, in.gamma, s, m);
  phi_value(p, WeightVector::uniform(2), in.val);
  phi_gradient(p, WeightVector::uniform(2), in.val, PhiGradMode::kFiniteDifference);
  phi_gradient(p, WeightVector::uniform(2), in.val, PhiGradMode::kAnalyticFrozen);
  EXPECT_TRUE(s == before);
  EXPECT_EQ(in.x, x_before);
}

TEST(PhiValueTest, NonFiniteCarriesWeights) {
  const LossModel m(ModelKind::kMeanEstimation, 2);
  const Vector x = Vector::Zero(2);
  const std::vector<Vector> grads{Vector::Constant(2, 1e300), Vector::Zero(2)};
  const OptimizerState s(OptimizerKind::kSgd, {}, 2);
  const PhiProblem p(x, grads, 1e10, s, m);
  try {
    phi_value(p, WeightVector({0.5, 0.5}), SampleSet::Zero(1, 2));
    FAIL();
  } catch (const PhiEvaluationError& e) {
    EXPECT_EQ(e.weights(), Vector::Constant(2, 0.5));
  }
}

TEST(PhiGradientTest, SgdClosedForm) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  std::mt19937_64 rng(4);
  const Instance in = random_instance(rng, 5, 3);
  const OptimizerState s(OptimizerKind::kSgd, {}, 5);
  const PhiProblem p(in.x, in.grads, in.gamma, s, m);
  const WeightVector w({0.2, 0.3, 0.5});
  Vector xp = in.x;
  for (std::size_t i = 0; i < 3; ++i) xp -= in.gamma * w[i] * in.grads[i];
  const Vector gval = m.gradient(in.val, xp);
  const Vector g = phi_gradient(p, w, in.val, PhiGradMode::kAnalyticFrozen);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(g[static_cast<Eigen::Index>(i)], -in.gamma * in.grads[i].dot(gval), 1e-12);
  }
}

TEST(PhiGradientTest, AnalyticMatchesIndependentCentralDifferences) {
  const LossModel m(ModelKind::kMeanEstimation, 6);
  std::mt19937_64 rng(5);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const Instance in = random_instance(rng, 6, n);
    const OptimizerState s(OptimizerKind::kSgd, {}, 6);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    std::exponential_distribution<double> e(1.0);
    Vector wv(static_cast<Eigen::Index>(n));
    for (auto& v : wv) v = e(rng);
    const WeightVector w = WeightVector::normalized(wv);
    const Vector analytic = phi_gradient(p, w, in.val, PhiGradMode::kAnalyticFrozen);
    Vector fd(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < fd.size(); ++i) {
      Vector wp = w.values(), wm = w.values();
      wp[i] += h;
      wm[i] -= h;
      fd[i] = (direct_phi(in.x, in.grads, in.gamma, wp, in.val) -
               direct_phi(in.x, in.grads, in.gamma, wm, in.val)) /
              (2 * h);
    }
    ASSERT_LE((analytic - fd).norm() / fd.norm(), 1e-4) << "trial " << trial;
  }
}

TEST(PhiGradientTest, FiniteDifferenceIsProjectedAnalytic) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Instance in = random_instance(rng, 4, 3);
    const OptimizerState s(OptimizerKind::kSgd, {}, 4);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    const WeightVector w = WeightVector::uniform(3);
    Vector a = phi_gradient(p, w, in.val, PhiGradMode::kAnalyticFrozen);
    a.array() -= a.mean();
    const Vector f = phi_gradient(p, w, in.val, PhiGradMode::kFiniteDifference);
    EXPECT_NEAR(f.mean(), 0.0, 1e-12);
    ASSERT_LT((a - f).lpNorm<Eigen::Infinity>(), 1e-6 * std::max(1.0, a.norm()));
  }
}

TEST(PhiGradientTest, IdenticalGradientsGiveEqualComponents) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  std::mt19937_64 rng(7);
  Instance in = random_instance(rng, 3, 1);
  in.grads = {in.grads[0], in.grads[0], in.grads[0]};
  for (auto k : {OptimizerKind::kSgd, OptimizerKind::kAdam}) {
    const OptimizerState s(k, {}, 3);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    const Vector g =
        phi_gradient(p, WeightVector({0.2, 0.3, 0.5}), in.val, PhiGradMode::kAnalyticFrozen);
    EXPECT_EQ(g[0], g[1]);
    EXPECT_EQ(g[1], g[2]);
  }
}

TEST(PhiGradientTest, AdaptiveFrozenApproximatesFiniteDifferences) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  std::mt19937_64 rng(8);
  const Instance in = random_instance(rng, 4, 3);
  const OptimizerState s(OptimizerKind::kAdaGradNorm, {}, 4);
  const PhiProblem p(in.x, in.grads, in.gamma, s, m);
  Vector a = phi_gradient(p, WeightVector::uniform(3), in.val, PhiGradMode::kAnalyticFrozen);
  a.array() -= a.mean();
  const Vector f =
      phi_gradient(p, WeightVector::uniform(3), in.val, PhiGradMode::kFiniteDifference);
  // Same sign pattern; the frozen preconditioner drops a second-order term.
  for (Eigen::Index i = 0; i < 3; ++i) {
    if (std::abs(f[i]) > 1e-3) EXPECT_EQ(a[i] > 0, f[i] > 0);
  }
}

TEST(SolveWeightsTest, SingleSourceAndZeroIterations) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  std::mt19937_64 gen(9);
  const Instance in = random_instance(gen, 3, 3);
  const OptimizerState s(OptimizerKind::kSgd, {}, 3);
  const std::vector<Vector> one{in.grads[0]};
  const PhiProblem p1(in.x, one, in.gamma, s, m);
  MdConfig cfg;
  cfg.iterations = 50;
  Rng rng(1);
  EXPECT_EQ(solve_weights(p1, cfg, WeightVector({1.0}), rng).values(), Vector::Ones(1));
  const PhiProblem p3(in.x, in.grads, in.gamma, s, m);
  cfg.iterations = 0;
  EXPECT_EQ(solve_weights(p3, cfg, WeightVector::uniform(3), rng),
            WeightVector::uniform(3));
}

TEST(SolveWeightsTest, AlignedConstructionFavoursDescentSource) {
  const Instance in = aligned_instance();
  const LossModel m(ModelKind::kMeanEstimation, in.x.size());
  const OptimizerState s(OptimizerKind::kSgd, {}, in.x.size());
  const PhiProblem p(in.x, in.grads, in.gamma, s, m);
  MdConfig cfg;
  cfg.iterations = 100;
  cfg.eta = 0.1;
  const WeightVector w = solve_weights_on_batch(p, cfg, WeightVector::uniform(3), in.val);
  EXPECT_GT(w[0], 0.9);
  // Exhaustive grid at spacing 1e-3.
  double best = INFINITY;
  Vector arg;
  for (int i = 0; i <= 1000; ++i) {
    for (int j = 0; i + j <= 1000; ++j) {
      Vector wv(3);
      wv << i / 1000.0, j / 1000.0, (1000 - i - j) / 1000.0;
      const double v = direct_phi(in.x, in.grads, in.gamma, wv, in.val);
      if (v < best) {
        best = v;
        arg = wv;
      }
    }
  }
  EXPECT_LT((w.values() - arg).lpNorm<Eigen::Infinity>(), 2e-2);
}

TEST(SolveWeightsTest, MatchesCoarseGridMinimizer) {
  const LossModel m(ModelKind::kMeanEstimation, 5);
  std::mt19937_64 gen(10);
  const DataSource val = make_gaussian_source("v", 5, MeanSpec::zero(), 40, 3);
  const DataSource a = make_gaussian_source("a", 5, MeanSpec::zero(), 40, 4);
  const DataSource b = make_gaussian_source("b", 5, MeanSpec::scaled_ones(0.5), 40, 5);
  const DataSource c = make_gaussian_source("c", 5, MeanSpec::random_unit(6), 40, 6);
  const Vector x = Vector::Constant(5, 1.0);
  const std::vector<Vector> grads{m.gradient(a.samples, x), m.gradient(b.samples, x),
                                  m.gradient(c.samples, x)};
  const OptimizerState s(OptimizerKind::kSgd, {}, 5);
  const PhiProblem p(x, grads, 0.1, s, m);
  MdConfig cfg;
  cfg.iterations = 2000;
  cfg.eta = 0.5;
  const WeightVector w = solve_weights_on_batch(p, cfg, WeightVector::uniform(3), val.samples);
  double best = INFINITY;
  Vector arg;
  for (int i = 0; i <= 100; ++i) {
    for (int j = 0; i + j <= 100; ++j) {
      Vector wv(3);
      wv << i / 100.0, j / 100.0, (100 - i - j) / 100.0;
      const double v = direct_phi(x, grads, 0.1, wv, val.samples);
      if (v < best) {
        best = v;
        arg = wv;
      }
    }
  }
  EXPECT_LT((w.values() - arg).lpNorm<Eigen::Infinity>(), 2e-2)
      << w.values().transpose() << " vs " << arg.transpose();
}

TEST(SolveWeightsTest, MonotoneTrialDescent) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(gen, 4, 3);
    const OptimizerState s(OptimizerKind::kSgd, {}, 4);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    for (auto mode : {PhiGradMode::kAnalyticFrozen, PhiGradMode::kFiniteDifference}) {
      MdConfig cfg;
      cfg.eta = 0.01;
      cfg.iterations = 200;
      cfg.grad_mode = mode;
      std::vector<WeightVector> path;
      solve_weights_on_batch(p, cfg, WeightVector::uniform(3), in.val, &path);
      ASSERT_EQ(path.size(), 201u);
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        ASSERT_LE(phi_value(p, path[k + 1], in.val), phi_value(p, path[k], in.val) + 1e-12)
            << "trial " << trial << " iteration " << k;
      }
    }
  }
}

TEST(SolveWeightsTest, GradientModesAgreeUnderSgd) {
  const LossModel m(ModelKind::kMeanEstimation, 4);
  std::mt19937_64 gen(12);
  for (int trial = 0; trial < 20; ++trial) {
    const Instance in = random_instance(gen, 4, 3);
    const OptimizerState s(OptimizerKind::kSgd, {}, 4);
    const PhiProblem p(in.x, in.grads, in.gamma, s, m);
    MdConfig cfg;
    cfg.iterations = 50;
    cfg.grad_mode = PhiGradMode::kAnalyticFrozen;
    const WeightVector a = solve_weights_on_batch(p, cfg, WeightVector::uniform(3), in.val);
    cfg.grad_mode = PhiGradMode::kFiniteDifference;
    const WeightVector f = solve_weights_on_batch(p, cfg, WeightVector::uniform(3), in.val);
    ASSERT_LT((a.values() - f.values()).lpNorm<Eigen::Infinity>(), 1e-3);
  }
}

TEST(SolveWeightsTest, SingleBatchModeUsesOneDraw) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  const DataSource val = make_gaussian_source("v", 3, MeanSpec::zero(), 50, 2);
  std::mt19937_64 gen(13);
  const Instance in = random_instance(gen, 3, 3);
  const OptimizerState s(OptimizerKind::kSgd, {}, 3);
  const PhiProblem p(in.x, in.grads, in.gamma, s, m, &val);
  MdConfig cfg;
  cfg.iterations = 7;
  Rng r1(77), r2(77);
  const WeightVector w = solve_weights(p, cfg, WeightVector::uniform(3), r1);
  const SampleSet batch = sample_minibatch(val, cfg.val_batch_size, r2);
  EXPECT_EQ(w, solve_weights_on_batch(p, cfg, WeightVector::uniform(3), batch));
}

TEST(SolveWeightsTest, ResamplingDrawsPerIteration) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  const DataSource val = make_gaussian_source("v", 3, MeanSpec::zero(), 50, 2);
  std::mt19937_64 gen(14);
  const Instance in = random_instance(gen, 3, 3);
  const OptimizerState s(OptimizerKind::kSgd, {}, 3);
  const PhiProblem p(in.x, in.grads, in.gamma, s, m, &val);
  MdConfig cfg;
  cfg.iterations = 4;
  cfg.resample_val_per_iter = true;
  Rng r1(5), r2(5);
  const WeightVector w = solve_weights(p, cfg, WeightVector::uniform(3), r1);
  WeightVector ref = WeightVector::uniform(3);
  for (int k = 0; k < 4; ++k) {
    const SampleSet b = sample_minibatch(val, cfg.val_batch_size, r2);
    ref = smd_step(ref, phi_gradient(p, ref, b, cfg.grad_mode), cfg.eta);
  }
  EXPECT_EQ(w, ref);
}

TEST(SolveWeightsTest, OversizedValidationBatchThrows) {
  const LossModel m(ModelKind::kMeanEstimation, 3);
  const DataSource val = make_gaussian_source("v", 3, MeanSpec::zero(), 5, 2);
  std::mt19937_64 gen(15);
  const Instance in = random_instance(gen, 3, 2);
  const OptimizerState s(OptimizerKind::kSgd, {}, 3);
  const PhiProblem p(in.x, in.grads, in.gamma, s, m, &val);
  MdConfig cfg;
  Rng rng(1);
  EXPECT_THROW(solve_weights(p, cfg, WeightVector::uniform(2), rng), std::invalid_argument);
}

}  // namespace
}  // namespace meritopt
