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

#ifndef MERITOPT_TYPES_H_
#define MERITOPT_TYPES_H_

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace meritopt {

// Model parameters x and gradients live in R^d.
using Vector = Eigen::VectorXd;

// A set of samples, one sample per row.
using SampleSet = Eigen::MatrixXd;

// Raised when a computation produces NaN or infinity.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require_same_dim(Eigen::Index a, Eigen::Index b,
                             const char* what = "dimension mismatch") {
  if (a != b) throw std::invalid_argument(what);
}

}  // namespace meritopt

#endif  // MERITOPT_TYPES_H_
