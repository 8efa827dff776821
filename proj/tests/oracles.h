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

// Reference implementations shared by the unit and acceptance tests. They are
// written independently of the library code they check.

#ifndef MERITOPT_TESTS_ORACLES_H_
#define MERITOPT_TESTS_ORACLES_H_

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "meritopt/types.h"

namespace meritopt {

// Independent water-filling oracle: repeatedly pin the side (upper or lower
// bound violators) with the larger total violation, then split the rest
// proportionally; largest-remainder rounding afterwards.
inline std::vector<Eigen::Index> water_filling_oracle(const std::vector<Eigen::Index>& sizes,
                                               Eigen::Index total, Eigen::Index lo_b,
                                               Eigen::Index hi_b) {
  const std::size_t n = sizes.size();
  std::vector<double> lo(n), hi(n), a(n);
  std::vector<bool> pinned(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    hi[i] = static_cast<double>(std::min(hi_b, sizes[i]));
    lo[i] = std::min(static_cast<double>(lo_b), hi[i]);
  }
  bool any_free = true;
  for (;;) {
    double rest = static_cast<double>(total), free_mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) {
        rest -= a[i];
      } else {
        free_mass += static_cast<double>(sizes[i]);
      }
    }
    if (free_mass == 0.0) {
      any_free = false;
      break;
    }
    double up = 0.0, down = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) continue;
      a[i] = rest * static_cast<double>(sizes[i]) / free_mass;
      if (a[i] > hi[i]) up += a[i] - hi[i];
      if (a[i] < lo[i]) down += lo[i] - a[i];
    }
    if (up == 0.0 && down == 0.0) break;
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i]) continue;
      if (up >= down && a[i] > hi[i]) {
        a[i] = hi[i];
        pinned[i] = true;
      } else if (up < down && a[i] < lo[i]) {
        a[i] = lo[i];
        pinned[i] = true;
      }
    }
  }
  Eigen::Index want = total;
  if (!any_free) {
    want = 0;
    for (double v : a) want += static_cast<Eigen::Index>(std::llround(v));
  }
  std::vector<Eigen::Index> out(n);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Eigen::Index assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<Eigen::Index>(std::floor(a[i] + 1e-9));
    assigned += out[i];
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return a[x] - std::floor(a[x] + 1e-9) > a[y] - std::floor(a[y] + 1e-9);
  });
  for (std::size_t k = 0; assigned < want && k < n; ++k) {
    ++out[order[k]];
    ++assigned;
  }
  return out;
}

// Direct mean-estimation phi under SGD: mean_k |x - gamma G w - xi_k|^2.
inline double direct_phi(const Vector& x, const std::vector<Vector>& grads, double gamma,
                  const Vector& w, const SampleSet& val) {
  Vector xp = x;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    xp -= gamma * w[static_cast<Eigen::Index>(i)] * grads[i];
  }
  double acc = 0.0;
  for (Eigen::Index r = 0; r < val.rows(); ++r) {
    acc += (xp - val.row(r).transpose()).squaredNorm();
  }
  return acc / static_cast<double>(val.rows());
}

}  // namespace meritopt

#endif  // MERITOPT_TESTS_ORACLES_H_
