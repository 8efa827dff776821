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

// Pluggable OptStep(x, g, gamma) update rules.
//
// Every rule mutates only the OptimizerState it is handed. Trial steps (the
// weight solver evaluates many candidate aggregation weights per outer step)
// run on a copy, so the real state is never touched. OptimizerState is a
// plain value type: copying it is a deep copy.

#ifndef MERITOPT_OPT_STEP_H_
#define MERITOPT_OPT_STEP_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "meritopt/types.h"

namespace meritopt {

enum class OptimizerKind { kSgd, kAdam, kRmsProp, kAdaGradNorm };

std::string_view to_string(OptimizerKind kind);
OptimizerKind optimizer_kind_from_string(std::string_view name);

struct OptimizerHyper {
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  // Initial AdaGrad-Norm accumulator; must be positive.
  double b0 = 1.0;
};

void validate(OptimizerKind kind, const OptimizerHyper& hyper);

class OptimizerState {
 public:
  OptimizerState() = default;
  OptimizerState(OptimizerKind kind, OptimizerHyper hyper, Eigen::Index dim);

  OptimizerKind kind() const { return kind_; }
  const OptimizerHyper& hyper() const { return hyper_; }
  std::int64_t step_count() const { return step_count_; }
  Eigen::Index dim() const { return dim_; }

  // Adam moments; empty for other kinds.
  const Vector& first_moment() const { return m_; }
  const Vector& second_moment() const { return v_; }

  // RMSProp: the pre-epsilon accumulator, componentwise. The divisor applied
  // at a step is sqrt(accumulator) + eps.
  const Vector& rms_accumulator() const { return rms_sq_; }
  Vector rms_divisor() const;

  // AdaGrad-Norm scalar b_t. Stored squared so that the recursion
  // b_{t+1}^2 = b_t^2 + |g|^2 is exact whenever the inputs are.
  double adagrad_b() const;
  double adagrad_b_squared() const { return adagrad_sq_; }

  // Test hook for aliasing checks.
  void perturb_for_test(double delta);

  bool operator==(const OptimizerState& other) const;

 private:
  friend Vector sgd_step(OptimizerState&, const Vector&, const Vector&, double);
  friend Vector adam_step(OptimizerState&, const Vector&, const Vector&, double);
  friend Vector rmsprop_step(OptimizerState&, const Vector&, const Vector&,
                             double);
  friend Vector adagrad_norm_step(OptimizerState&, const Vector&,
                                  const Vector&, double);

  OptimizerKind kind_ = OptimizerKind::kSgd;
  OptimizerHyper hyper_{};
  std::int64_t step_count_ = 0;
  Eigen::Index dim_ = 0;
  Vector m_;
  Vector v_;
  Vector rms_sq_;
  double adagrad_sq_ = 0.0;
};

// x' = x - gamma * g.
Vector sgd_step(OptimizerState& state, const Vector& x, const Vector& g,
                double gamma);

// Bias-corrected Adam: x' = x - gamma * mhat / (sqrt(vhat) + eps).
Vector adam_step(OptimizerState& state, const Vector& x, const Vector& g,
                 double gamma);

// b_t = sqrt(beta2 * b_{t-1}^2 + (1 - beta2) g^2) + eps, x' = x - gamma g / b_t,
// all componentwise.
Vector rmsprop_step(OptimizerState& state, const Vector& x, const Vector& g,
                    double gamma);

// b_{t+1} = sqrt(b_t^2 + |g|^2), x' = x - gamma g / b_{t+1}.
Vector adagrad_norm_step(OptimizerState& state, const Vector& x,
                         const Vector& g, double gamma);

// Dispatches on state.kind().
Vector opt_step(OptimizerState& state, const Vector& x, const Vector& g,
                double gamma);

// Deep copy. Provided for symmetry with the other operations; a copy
// construction does the same thing.
inline OptimizerState clone_state(const OptimizerState& state) {
  return state;
}

// Diagonal of d x' / d g for one step taken with gradient g from `state`,
// holding the adaptive preconditioner fixed at its post-update value. Exact
// for SGD. Does not modify `state`.
Vector frozen_step_jacobian(const OptimizerState& state, const Vector& g,
                            double gamma);

}  // namespace meritopt

#endif  // MERITOPT_OPT_STEP_H_
