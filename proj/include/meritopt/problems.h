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

// Loss models with analytic gradients. Losses are per-batch means.
//
//   mean-estimation:      f(x; xi)     = |x - xi|^2,          sample = xi
//   linear-regression:    f(x; a, y)   = (<a, x> - y)^2 / 2,  sample = (a, y)
//   logistic-regression:  f(x; a, y)   = log(1 + e^z) - y z,  z = <a, x>

#ifndef MERITOPT_PROBLEMS_H_
#define MERITOPT_PROBLEMS_H_

#include <string_view>
#include <utility>

#include "meritopt/sources.h"
#include "meritopt/types.h"

namespace meritopt {

enum class ModelKind { kMeanEstimation, kLinearRegression, kLogisticRegression };

std::string_view to_string(ModelKind kind);
ModelKind model_kind_from_string(std::string_view name);

struct Optimum {
  Vector x;
  double value = 0.0;
};

class LossModel {
 public:
  LossModel(ModelKind kind, Eigen::Index dim);

  ModelKind kind() const { return kind_; }
  // Parameter dimension d.
  Eigen::Index dim() const { return dim_; }
  // Width of one sample row: d for mean estimation, d + 1 otherwise.
  Eigen::Index sample_width() const;

  double loss(const SampleSet& batch, const Vector& x) const;
  Vector gradient(const SampleSet& batch, const Vector& x) const;

  // Population optimum for a source generated from known parameters:
  // mean estimation over N(mu, s^2 I) gives (mu, d s^2); noiseless or noisy
  // linear regression gives (coef, noise^2 / 2). Logistic regression and
  // file sources have no closed form.
  Optimum closed_form_optimum(const DataSource& source) const;

 private:
  void check(const SampleSet& batch, const Vector& x) const;

  ModelKind kind_;
  Eigen::Index dim_;
};

}  // namespace meritopt

#endif  // MERITOPT_PROBLEMS_H_
