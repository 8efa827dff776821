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

#ifndef MERITOPT_SIMPLEX_H_
#define MERITOPT_SIMPLEX_H_

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "meritopt/types.h"

namespace meritopt {

inline constexpr double kSimplexTolerance = 1e-9;

// A point on the probability simplex: nonnegative entries summing to one.
class WeightVector {
 public:
  WeightVector() = default;

  // Validates that `values` already lies on the simplex.
  explicit WeightVector(Vector values);
  WeightVector(std::initializer_list<double> values);

  static WeightVector uniform(std::size_t n);
  // Indicator of index `i` among `n`.
  static WeightVector vertex(std::size_t n, std::size_t i);
  // Scales nonnegative `values` to sum to one. Throws if the sum is zero.
  static WeightVector normalized(const Vector& values);

  std::size_t size() const { return static_cast<std::size_t>(w_.size()); }
  double operator[](std::size_t i) const { return w_[static_cast<Eigen::Index>(i)]; }
  const Vector& values() const { return w_; }

  // Index of the largest weight, lowest index on ties.
  std::size_t argmax() const;

  bool operator==(const WeightVector& other) const { return w_ == other.w_; }

 private:
  Vector w_;
};

bool on_simplex(const Vector& w, double tol = kSimplexTolerance);

// One exponentiated-gradient (KL mirror descent) step:
//   w'_i = w_i exp(-eta g_i) / sum_j w_j exp(-eta g_j).
// Exponents are shifted by their maximum over the support of w before
// exponentiating, which leaves the result unchanged and cannot overflow.
WeightVector smd_step(const WeightVector& w, const Vector& grad_phi,
                      double eta);

}  // namespace meritopt

#endif  // MERITOPT_SIMPLEX_H_
