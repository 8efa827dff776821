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

#include "meritopt/weight_solver.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace meritopt {

std::string_view to_string(PhiGradMode mode) {
  switch (mode) {
    case PhiGradMode::kAnalyticFrozen: return "analytic-frozen";
    case PhiGradMode::kFiniteDifference: return "finite-difference";
  }
  return "unknown";
}

PhiGradMode phi_grad_mode_from_string(std::string_view name) {
  if (name == "analytic-frozen") return PhiGradMode::kAnalyticFrozen;
  if (name == "finite-difference") return PhiGradMode::kFiniteDifference;
  throw std::invalid_argument("unknown grad_mode '" + std::string(name) + "'");
}

void validate(const MdConfig& cfg) {
  if (!(cfg.eta > 0.0) || !std::isfinite(cfg.eta)) {
    throw std::invalid_argument("md.eta must be positive");
  }
  if (cfg.iterations < 0) {
    throw std::invalid_argument("md.iterations must be nonnegative");
  }
  if (cfg.val_batch_size < 1) {
    throw std::invalid_argument("md.val_batch_size must be positive");
  }
}

PhiProblem::PhiProblem(const Vector& x, const std::vector<Vector>& grads,
                       double step_size, const OptimizerState& state,
                       const LossModel& model, const DataSource* validation)
    : x_(&x),
      grads_(&grads),
      step_size_(step_size),
      state_(&state),
      model_(&model),
      validation_(validation) {
  if (grads.empty()) throw std::invalid_argument("phi needs at least one gradient");
  for (const auto& g : grads) require_same_dim(g.size(), x.size());
  require_same_dim(x.size(), model.dim());
}

const DataSource& PhiProblem::validation() const {
  if (validation_ == nullptr) {
    throw std::logic_error("phi problem has no validation source");
  }
  return *validation_;
}

Vector PhiProblem::combined_gradient(const Vector& w) const {
  require_same_dim(w.size(), static_cast<Eigen::Index>(grads_->size()));
  Vector g = Vector::Zero(x_->size());
  for (std::size_t i = 0; i < grads_->size(); ++i) {
    g += w[static_cast<Eigen::Index>(i)] * (*grads_)[i];
  }
  return g;
}

Vector PhiProblem::trial_point(const Vector& w) const {
  OptimizerState trial = clone_state(*state_);
  return opt_step(trial, *x_, combined_gradient(w), step_size_);
}

namespace {

double phi_raw(const PhiProblem& problem, const Vector& w,
               const SampleSet& val_batch) {
  const double value = problem.model().loss(val_batch, problem.trial_point(w));
  if (!std::isfinite(value)) {
    throw PhiEvaluationError("non-finite validation loss in phi", w);
  }
  return value;
}

}  // namespace

double phi_value(const PhiProblem& problem, const WeightVector& w,
                 const SampleSet& val_batch) {
  return phi_raw(problem, w.values(), val_batch);
}

Vector phi_gradient(const PhiProblem& problem, const WeightVector& w,
                    const SampleSet& val_batch, PhiGradMode mode) {
  const auto n = static_cast<Eigen::Index>(problem.num_sources());
  require_same_dim(static_cast<Eigen::Index>(w.size()), n);
  Vector grad(n);
  if (mode == PhiGradMode::kAnalyticFrozen) {
    const Vector g = problem.combined_gradient(w.values());
    const Vector x_plus = problem.trial_point(w.values());
    const Vector jac =
        frozen_step_jacobian(problem.state(), g, problem.step_size());
    const Vector outer =
        (problem.model().gradient(val_batch, x_plus).array() * jac.array())
            .matrix();
    for (Eigen::Index i = 0; i < n; ++i) {
      grad[i] = outer.dot(problem.grads()[static_cast<std::size_t>(i)]);
    }
  } else {
    Vector probe = w.values();
    for (Eigen::Index i = 0; i < n; ++i) {
      const double saved = probe[i];
      probe[i] = saved + kPhiFdStep;
      const double up = phi_raw(problem, probe, val_batch);
      probe[i] = saved - kPhiFdStep;
      const double down = phi_raw(problem, probe, val_batch);
      probe[i] = saved;
      grad[i] = (up - down) / (2.0 * kPhiFdStep);
    }
    grad.array() -= grad.mean();
  }
  if (!grad.allFinite()) throw NumericalError("non-finite φ-gradient");
  return grad;
}

WeightVector solve_weights_on_batch(const PhiProblem& problem,
                                    const MdConfig& cfg,
                                    const WeightVector& init,
                                    const SampleSet& val_batch,
                                    std::vector<WeightVector>* path) {
  validate(cfg);
  require_same_dim(static_cast<Eigen::Index>(init.size()),
                   static_cast<Eigen::Index>(problem.num_sources()));
  WeightVector w = init;
  if (path != nullptr) path->push_back(w);
  if (problem.num_sources() == 1) return w;
  for (int k = 0; k < cfg.iterations; ++k) {
    w = smd_step(w, phi_gradient(problem, w, val_batch, cfg.grad_mode), cfg.eta);
    if (path != nullptr) path->push_back(w);
  }
  return w;
}

WeightVector solve_weights(const PhiProblem& problem, const MdConfig& cfg,
                           const WeightVector& init, Rng& rng) {
  validate(cfg);
  require_same_dim(static_cast<Eigen::Index>(init.size()),
                   static_cast<Eigen::Index>(problem.num_sources()));
  if (problem.num_sources() == 1 || cfg.iterations == 0) return init;
  const DataSource& val = problem.validation();
  if (cfg.val_batch_size > val.size()) {
    throw std::invalid_argument("md.val_batch_size exceeds validation set size");
  }
  if (!cfg.resample_val_per_iter) {
    const SampleSet batch = sample_minibatch(val, cfg.val_batch_size, rng);
    return solve_weights_on_batch(problem, cfg, init, batch);
  }
  WeightVector w = init;
  for (int k = 0; k < cfg.iterations; ++k) {
    const SampleSet batch = sample_minibatch(val, cfg.val_batch_size, rng);
    w = smd_step(w, phi_gradient(problem, w, batch, cfg.grad_mode), cfg.eta);
  }
  return w;
}

}  // namespace meritopt
