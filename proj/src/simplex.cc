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

#include "meritopt/simplex.h"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace meritopt {

bool on_simplex(const Vector& w, double tol) {
  if (w.size() == 0) return false;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0) || !std::isfinite(w[i])) return false;
  }
  return std::abs(w.sum() - 1.0) <= tol;
}

WeightVector::WeightVector(Vector values) : w_(std::move(values)) {
  if (!on_simplex(w_)) {
    throw std::invalid_argument("weights are not on the probability simplex");
  }
}

WeightVector::WeightVector(std::initializer_list<double> values)
    : WeightVector(Vector::Map(values.begin(),
                               static_cast<Eigen::Index>(values.size()))) {}

WeightVector WeightVector::uniform(std::size_t n) {
  if (n == 0) throw std::invalid_argument("empty weight vector");
  return WeightVector(Vector::Constant(static_cast<Eigen::Index>(n),
                                       1.0 / static_cast<double>(n)));
}

WeightVector WeightVector::vertex(std::size_t n, std::size_t i) {
  if (i >= n) throw std::out_of_range("vertex index out of range");
  Vector w = Vector::Zero(static_cast<Eigen::Index>(n));
  w[static_cast<Eigen::Index>(i)] = 1.0;
  return WeightVector(std::move(w));
}

WeightVector WeightVector::normalized(const Vector& values) {
  if ((values.array() < 0.0).any()) {
    throw std::invalid_argument("negative weight");
  }
  const double total = values.sum();
  if (!(total > 0.0) || !std::isfinite(total)) {
    throw std::invalid_argument("cannot normalize weights with zero mass");
  }
  return WeightVector(Vector(values / total));
}

std::size_t WeightVector::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < size(); ++i) {
    if ((*this)[i] > (*this)[best]) best = i;
  }
  return best;
}

WeightVector smd_step(const WeightVector& w, const Vector& grad_phi,
                      double eta) {
  require_same_dim(static_cast<Eigen::Index>(w.size()), grad_phi.size());
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw std::invalid_argument("SMD learning rate must be positive");
  }
  if (!grad_phi.allFinite()) throw NumericalError("non-finite MD gradient");

  const Vector& cur = w.values();
  const Eigen::Index n = cur.size();
  double shift = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cur[i] > 0.0) shift = std::max(shift, -eta * grad_phi[i]);
  }

  Vector next = Vector::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (cur[i] > 0.0) next[i] = cur[i] * std::exp(-eta * grad_phi[i] - shift);
  }
  const double denom = next.sum();
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw NumericalError("degenerate SMD update");
  }
  next /= denom;
  return WeightVector(std::move(next));
}

}  // namespace meritopt
