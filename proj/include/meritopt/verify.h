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

// Empirical checks of the quantities the convergence analysis relies on:
// gradient-noise variance of the ideal (target-distribution) average, the
// accuracy delta of the inner weight solve, neighborhood convergence, and
// optimizer state invariants.

#ifndef MERITOPT_VERIFY_H_
#define MERITOPT_VERIFY_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "meritopt/opt_step.h"
#include "meritopt/problems.h"
#include "meritopt/sources.h"
#include "meritopt/trainer.h"
#include "meritopt/weight_solver.h"

namespace meritopt {

struct VerificationReport {
  std::string check;
  // Named scalar measurements, kept in insertion order.
  std::vector<std::pair<std::string, double>> quantities;
  // Optional series (e.g. accumulator trajectory), emitted as extra rows.
  std::map<std::string, std::vector<double>> series;
  std::int64_t trials = 0;
  std::optional<double> bound;
  std::optional<double> measured;
  double tolerance = 0.0;
  bool pass = false;
  std::vector<std::string> notes;

  void add(std::string name, double value) {
    quantities.emplace_back(std::move(name), value);
  }
  std::optional<double> get(const std::string& name) const;
  // True when every scalar is finite.
  bool all_finite() const;
};

// Sum in fixed pairwise order; the result depends only on the input order.
double pairwise_sum(const std::vector<double>& values);

struct VarianceCheckOptions {
  std::int64_t trials = 10000;
  Eigen::Index batch_size = 1;
  double tolerance = 0.2;
  std::uint64_t seed = 0;
};

// For sources all drawn from the target distribution, compares the MSE of the
// uniform average of their stochastic gradients against sigma^2 / |G|, where
// sigma^2 is the measured single-source variance. The reference gradient is
// the expectation of each estimator (full-data gradient of its source).
VerificationReport check_variance_bound(const std::vector<DataSource>& group,
                                        const LossModel& model, const Vector& x,
                                        const VarianceCheckOptions& opts);

// Everything needed to evaluate phi deterministically at one outer step.
struct PhiSnapshot {
  Vector x;
  std::vector<Vector> grads;
  double step_size = 0.1;
  OptimizerState state;
  SampleSet val_batch;
  // Indices of sources drawn from the target distribution (w^ideal support).
  std::vector<std::size_t> ideal_support;
};

// Enumerates the simplex grid with the given spacing (n <= 4).
std::vector<Vector> simplex_grid(std::size_t n, double spacing);

// delta_hat = phi(w_smd) - min over the simplex grid of phi, where w_smd is
// solve_weights_on_batch from the uniform point. Also checks
// grid-min <= phi(w_ideal) + grid slack.
VerificationReport estimate_delta(const PhiSnapshot& snapshot,
                                  const LossModel& model, const MdConfig& md,
                                  double grid_step);

struct NeighborhoodOptions {
  int window = 50;
  std::optional<double> sigma_star_sq;
  std::optional<double> delta_hat;
  std::optional<double> gamma;
};

// Hard check: the running minimum of the recorded gradient norm is
// nonincreasing, and the minimum over the first half is >= the minimum over
// the full run. Diagnostic only: ratio of the final-window mean squared
// gradient norm to (sigma*^2 + delta/gamma).
VerificationReport check_neighborhood_convergence(
    const std::vector<TrajectoryRecord>& records,
    const NeighborhoodOptions& opts);

struct OptimizerCheckOptions {
  enum class Stream { kUnitNorm, kBounded, kZero };
  Stream stream = Stream::kBounded;
  int steps = 1000;
  Eigen::Index dim = 10;
  double bound = 1.0;  // G: componentwise bound of the bounded stream
  double gamma = 0.1;
  std::uint64_t seed = 0;
  bool emit_series = false;
};

// AdaGrad-Norm b nondecreasing (and equal to sqrt(b0^2 + t) on the unit
// stream); RMSProp divisor >= eps with displacement <= gamma G / eps;
// componentwise |g| <= G on the bounded stream; zero stream leaves x fixed.
VerificationReport check_optimizer_invariants(OptimizerKind kind,
                                              const OptimizerHyper& hyper,
                                              const OptimizerCheckOptions& opts);

}  // namespace meritopt

#endif  // MERITOPT_VERIFY_H_
