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

// The per-step auxiliary weight problem
//
//   w* ~ argmin_{w in simplex} phi(w),
//   phi(w) = f_val(OptStep(x, sum_i w_i g_i, gamma)),
//
// solved approximately with a few steps of stochastic mirror descent.

#ifndef MERITOPT_WEIGHT_SOLVER_H_
#define MERITOPT_WEIGHT_SOLVER_H_

#include <string_view>
#include <vector>

#include "meritopt/opt_step.h"
#include "meritopt/problems.h"
#include "meritopt/simplex.h"
#include "meritopt/sources.h"

namespace meritopt {

enum class PhiGradMode { kAnalyticFrozen, kFiniteDifference };

std::string_view to_string(PhiGradMode mode);
PhiGradMode phi_grad_mode_from_string(std::string_view name);

inline constexpr double kPhiFdStep = 1e-5;

struct MdConfig {
  double eta = 0.1;
  int iterations = 5;
  Eigen::Index val_batch_size = 10;
  bool resample_val_per_iter = false;
  bool warm_start = false;
  PhiGradMode grad_mode = PhiGradMode::kFiniteDifference;
};

void validate(const MdConfig& cfg);

// Evaluation of phi at w failed with a non-finite value.
class PhiEvaluationError : public NumericalError {
 public:
  PhiEvaluationError(const std::string& what, Vector weights)
      : NumericalError(what), weights_(std::move(weights)) {}
  const Vector& weights() const { return weights_; }

 private:
  Vector weights_;
};

// Non-owning view of everything phi needs at one outer step. The referenced
// objects must outlive the problem. The optimizer state is only ever copied.
class PhiProblem {
 public:
  PhiProblem(const Vector& x, const std::vector<Vector>& grads,
             double step_size, const OptimizerState& state,
             const LossModel& model, const DataSource* validation = nullptr);

  const Vector& x() const { return *x_; }
  const std::vector<Vector>& grads() const { return *grads_; }
  std::size_t num_sources() const { return grads_->size(); }
  double step_size() const { return step_size_; }
  const OptimizerState& state() const { return *state_; }
  const LossModel& model() const { return *model_; }
  const DataSource& validation() const;

  // sum_i w_i g_i, accumulated in index order. Accepts any real w so that
  // finite differences may step off the simplex.
  Vector combined_gradient(const Vector& w) const;
  // OptStep(x, sum_i w_i g_i, gamma) on a copy of the optimizer state.
  Vector trial_point(const Vector& w) const;

 private:
  const Vector* x_;
  const std::vector<Vector>* grads_;
  double step_size_;
  const OptimizerState* state_;
  const LossModel* model_;
  const DataSource* validation_;
};

double phi_value(const PhiProblem& problem, const WeightVector& w,
                 const SampleSet& val_batch);

// Analytic-frozen: d phi / d w_i = <grad f_val(x+), J g_i> with J the frozen
// step Jacobian. Finite-difference: central differences with step 1e-5,
// projected onto the simplex tangent space (component mean removed).
Vector phi_gradient(const PhiProblem& problem, const WeightVector& w,
                    const SampleSet& val_batch, PhiGradMode mode);

// Runs cfg.iterations SMD steps from `init`. The validation minibatch is drawn
// from problem.validation() once at entry, or once per iteration when
// cfg.resample_val_per_iter is set.
WeightVector solve_weights(const PhiProblem& problem, const MdConfig& cfg,
                           const WeightVector& init, Rng& rng);

// Deterministic variant on a fixed validation batch. When `path` is given it
// receives every iterate, starting with `init`.
WeightVector solve_weights_on_batch(const PhiProblem& problem,
                                    const MdConfig& cfg,
                                    const WeightVector& init,
                                    const SampleSet& val_batch,
                                    std::vector<WeightVector>* path = nullptr);

}  // namespace meritopt

#endif  // MERITOPT_WEIGHT_SOLVER_H_
