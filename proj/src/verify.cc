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

#include "meritopt/verify.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace meritopt {

std::optional<double> VerificationReport::get(const std::string& name) const {
  for (const auto& [k, v] : quantities) {
    if (k == name) return v;
  }
  return std::nullopt;
}

bool VerificationReport::all_finite() const {
  for (const auto& [k, v] : quantities) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double pairwise_sum(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  std::vector<double> level = values;
  while (level.size() > 1) {
    std::vector<double> next((level.size() + 1) / 2);
    for (std::size_t i = 0; i < next.size(); ++i) {
      const std::size_t a = 2 * i;
      next[i] = a + 1 < level.size() ? level[a] + level[a + 1] : level[a];
    }
    level.swap(next);
  }
  return level.front();
}

VerificationReport check_variance_bound(const std::vector<DataSource>& group,
                                        const LossModel& model, const Vector& x,
                                        const VarianceCheckOptions& opts) {
  if (group.empty()) throw std::invalid_argument("variance check needs sources");
  for (const auto& s : group) {
    if (!s.target_distribution) {
      throw std::invalid_argument("source '" + s.id +
                                  "' is not marked as drawn from the target "
                                  "distribution");
    }
  }
  if (opts.trials < 1000) {
    throw std::invalid_argument("variance check needs at least 1000 trials");
  }
  const std::size_t n = group.size();
  std::vector<Vector> reference(n);
  Vector ref_avg = Vector::Zero(model.dim());
  for (std::size_t i = 0; i < n; ++i) {
    reference[i] = model.gradient(group[i].samples, x);
    ref_avg += reference[i];
  }
  ref_avg /= static_cast<double>(n);

  const auto trials = static_cast<std::size_t>(opts.trials);
  std::vector<double> single(trials * n);
  std::vector<double> averaged(trials);
  for (std::size_t k = 0; k < trials; ++k) {
    Rng rng = make_stream(opts.seed, "variance-trial", k);
    Vector avg = Vector::Zero(model.dim());
    for (std::size_t i = 0; i < n; ++i) {
      const SampleSet batch = sample_minibatch(group[i], opts.batch_size, rng);
      const Vector g = model.gradient(batch, x);
      single[k * n + i] = (g - reference[i]).squaredNorm();
      avg += g;
    }
    avg /= static_cast<double>(n);
    averaged[k] = (avg - ref_avg).squaredNorm();
  }
  const double sigma_sq = pairwise_sum(single) / static_cast<double>(single.size());
  const double mse = pairwise_sum(averaged) / static_cast<double>(trials);

  VerificationReport r;
  r.check = "variance";
  r.trials = opts.trials;
  r.tolerance = opts.tolerance;
  r.add("group_size", static_cast<double>(n));
  r.add("sigma_sq", sigma_sq);
  r.add("sigma_star_sq", sigma_sq / static_cast<double>(n));
  r.add("mse_averaged", mse);
  r.add("mse_over_sigma_sq", mse / sigma_sq);
  r.bound = sigma_sq / static_cast<double>(n);
  r.measured = mse;
  r.pass = r.all_finite() && mse <= *r.bound * (1.0 + opts.tolerance);
  return r;
}

std::vector<Vector> simplex_grid(std::size_t n, double spacing) {
  if (n == 0) throw std::invalid_argument("empty simplex");
  if (n > 4) throw std::invalid_argument("grid infeasible for n > 4");
  if (!(spacing > 0.0) || spacing > 1.0) {
    throw std::invalid_argument("grid spacing must lie in (0, 1]");
  }
  const int m = static_cast<int>(std::lround(1.0 / spacing));
  std::vector<Vector> out;
  std::vector<int> parts(n, 0);
  // Enumerate compositions of m into n nonnegative parts.
  auto rec = [&](auto&& self, std::size_t pos, int left) -> void {
    if (pos + 1 == n) {
      parts[pos] = left;
      Vector w(static_cast<Eigen::Index>(n));
      for (std::size_t i = 0; i < n; ++i) {
        w[static_cast<Eigen::Index>(i)] = static_cast<double>(parts[i]) / m;
      }
      out.push_back(std::move(w));
      return;
    }
    for (int k = left; k >= 0; --k) {
      parts[pos] = k;
      self(self, pos + 1, left - k);
    }
  };
  rec(rec, 0, m);
  return out;
}

namespace {

// |phi(p) - phi(w)| for the best grid point p within one spacing of w.
double grid_slack(const std::vector<Vector>& grid,
                  const std::vector<double>& values, const Vector& w,
                  double phi_w, double spacing) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if ((grid[i] - w).cwiseAbs().maxCoeff() <= spacing + 1e-12) {
      best = std::min(best, std::abs(values[i] - phi_w));
    }
  }
  return best;
}

}  // namespace

VerificationReport estimate_delta(const PhiSnapshot& snap,
                                  const LossModel& model, const MdConfig& md,
                                  double grid_step) {
  const std::size_t n = snap.grads.size();
  const auto grid = simplex_grid(n, grid_step);
  PhiProblem problem(snap.x, snap.grads, snap.step_size, snap.state, model);

  std::vector<double> values(grid.size());
  std::size_t arg = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    values[i] = phi_value(problem, WeightVector(grid[i]), snap.val_batch);
    if (values[i] < values[arg]) arg = i;
  }
  const double grid_min = values[arg];

  const WeightVector w_smd = solve_weights_on_batch(
      problem, md, WeightVector::uniform(n), snap.val_batch);
  const double phi_smd = phi_value(problem, w_smd, snap.val_batch);
  const double delta_hat = phi_smd - grid_min;
  const double smd_slack =
      grid_slack(grid, values, w_smd.values(), phi_smd, grid_step);

  VerificationReport r;
  r.check = "delta";
  r.trials = static_cast<std::int64_t>(grid.size());
  r.add("grid_step", grid_step);
  r.add("grid_points", static_cast<double>(grid.size()));
  r.add("md_iterations", md.iterations);
  r.add("md_eta", md.eta);
  r.add("phi_smd", phi_smd);
  r.add("grid_min", grid_min);
  r.add("delta_hat", delta_hat);
  r.add("smd_grid_slack", smd_slack);
  for (std::size_t i = 0; i < n; ++i) {
    r.add("w_smd_" + std::to_string(i), w_smd[i]);
    r.add("w_grid_" + std::to_string(i), grid[arg][static_cast<Eigen::Index>(i)]);
  }
  bool ideal_ok = true;
  if (!snap.ideal_support.empty()) {
    Vector ideal = Vector::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t i : snap.ideal_support) {
      ideal[static_cast<Eigen::Index>(i)] = 1.0;
    }
    const WeightVector w_ideal = WeightVector::normalized(ideal);
    const double phi_ideal = phi_value(problem, w_ideal, snap.val_batch);
    const double ideal_slack =
        grid_slack(grid, values, w_ideal.values(), phi_ideal, grid_step);
    r.add("phi_ideal", phi_ideal);
    r.add("ideal_grid_slack", ideal_slack);
    ideal_ok = grid_min <= phi_ideal + ideal_slack;
  } else {
    r.notes.push_back("no ideal support given; w_ideal comparison skipped");
  }
  r.measured = delta_hat;
  r.bound = std::nullopt;
  r.pass = r.all_finite() && ideal_ok && delta_hat >= -smd_slack;
  return r;
}

VerificationReport check_neighborhood_convergence(
    const std::vector<TrajectoryRecord>& records,
    const NeighborhoodOptions& opts) {
  if (records.size() < 2 || opts.window < 1 ||
      static_cast<std::size_t>(opts.window) > records.size()) {
    throw std::invalid_argument("insufficient records for neighborhood check");
  }
  const std::size_t n = records.size();
  std::vector<double> running(n);
  bool monotone = true;
  double cur = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    cur = std::min(cur, records[i].grad_norm);
    running[i] = cur;
    if (i > 0 && running[i] > running[i - 1]) monotone = false;
  }
  const double min_half = running[(n / 2 > 0 ? n / 2 : 1) - 1];
  const double min_full = running[n - 1];

  std::vector<double> sq;
  for (std::size_t i = n - static_cast<std::size_t>(opts.window); i < n; ++i) {
    sq.push_back(records[i].grad_norm * records[i].grad_norm);
  }
  const double window_mean = pairwise_sum(sq) / static_cast<double>(sq.size());

  VerificationReport r;
  r.check = "neighborhood";
  r.trials = static_cast<std::int64_t>(n);
  r.add("records", static_cast<double>(n));
  r.add("min_grad_norm_first_half", min_half);
  r.add("min_grad_norm_full", min_full);
  r.add("final_window_mean_sq_grad_norm", window_mean);
  r.add("final_grad_norm", records.back().grad_norm);
  if (opts.sigma_star_sq && opts.delta_hat && opts.gamma && *opts.gamma > 0.0) {
    const double scale = *opts.sigma_star_sq + *opts.delta_hat / *opts.gamma;
    r.add("neighborhood_scale", scale);
    if (scale > 0.0) r.add("constant_C", window_mean / scale);
    r.notes.push_back("constant_C is diagnostic and not asserted");
  }
  r.series["running_min_grad_norm"] = running;
  r.measured = min_full;
  r.bound = min_half;
  r.pass = r.all_finite() && monotone && min_half >= min_full;
  return r;
}

VerificationReport check_optimizer_invariants(OptimizerKind kind,
                                              const OptimizerHyper& hyper,
                                              const OptimizerCheckOptions& opts) {
  if (opts.steps < 100) {
    throw std::invalid_argument("optimizer check needs at least 100 steps");
  }
  using Stream = OptimizerCheckOptions::Stream;
  OptimizerState state(kind, hyper, opts.dim);
  Vector x = Vector::Zero(opts.dim);
  const Vector x_start = x;

  bool b_monotone = true;
  double b_closed_form_dev = 0.0;
  double min_divisor = std::numeric_limits<double>::infinity();
  double max_ratio_displacement = 0.0;  // |x' - x|_inf / (gamma G / eps)
  double max_abs_grad = 0.0;
  std::vector<double> b_series;
  double prev_b = state.adagrad_b();

  for (int t = 0; t < opts.steps; ++t) {
    Rng rng = make_stream(opts.seed, "optimizer-stream", static_cast<std::uint64_t>(t));
    Vector g = Vector::Zero(opts.dim);
    if (opts.stream == Stream::kUnitNorm) {
      std::uniform_int_distribution<Eigen::Index> coord(0, opts.dim - 1);
      std::bernoulli_distribution sign(0.5);
      const Eigen::Index j = coord(rng);
      g[j] = sign(rng) ? 1.0 : -1.0;
    } else if (opts.stream == Stream::kBounded) {
      std::uniform_real_distribution<double> u(-opts.bound, opts.bound);
      for (Eigen::Index j = 0; j < opts.dim; ++j) g[j] = u(rng);
    }
    max_abs_grad = std::max(max_abs_grad, g.cwiseAbs().maxCoeff());

    const Vector x_next = opt_step(state, x, g, opts.gamma);
    if (kind == OptimizerKind::kAdaGradNorm) {
      const double b = state.adagrad_b();
      if (b < prev_b) b_monotone = false;
      prev_b = b;
      if (opts.stream == Stream::kUnitNorm) {
        const double expect =
            std::sqrt(hyper.b0 * hyper.b0 + static_cast<double>(t + 1));
        b_closed_form_dev = std::max(b_closed_form_dev, std::abs(b - expect));
      }
      if (opts.emit_series) b_series.push_back(b);
    }
    if (kind == OptimizerKind::kRmsProp) {
      min_divisor = std::min(min_divisor, state.rms_divisor().minCoeff());
      if (opts.stream == Stream::kBounded) {
        const double cap = opts.gamma * opts.bound / hyper.eps;
        max_ratio_displacement = std::max(
            max_ratio_displacement, (x_next - x).cwiseAbs().maxCoeff() / cap);
      }
      if (opts.emit_series) b_series.push_back(state.rms_divisor().minCoeff());
    }
    x = x_next;
  }

  VerificationReport r;
  r.check = "optimizer";
  r.trials = opts.steps;
  r.add("steps", opts.steps);
  r.add("max_abs_grad_component", max_abs_grad);
  bool ok = true;
  if (opts.stream == Stream::kBounded) {
    r.add("bound_G", opts.bound);
    ok = ok && max_abs_grad <= opts.bound;
  }
  if (opts.stream == Stream::kZero) {
    const double moved = (x - x_start).cwiseAbs().maxCoeff();
    r.add("zero_stream_displacement", moved);
    ok = ok && moved == 0.0;
  }
  if (kind == OptimizerKind::kAdaGradNorm) {
    r.add("b_final", state.adagrad_b());
    r.add("b_monotone", b_monotone ? 1.0 : 0.0);
    ok = ok && b_monotone;
    if (opts.stream == Stream::kUnitNorm) {
      r.add("b_closed_form_max_abs_dev", b_closed_form_dev);
      ok = ok && b_closed_form_dev == 0.0;
    }
    if (opts.emit_series) r.series["b"] = b_series;
  }
  if (kind == OptimizerKind::kRmsProp) {
    r.add("min_divisor", min_divisor);
    r.add("eps", hyper.eps);
    ok = ok && min_divisor >= hyper.eps;
    if (opts.stream == Stream::kBounded) {
      r.add("max_displacement_over_cap", max_ratio_displacement);
      ok = ok && max_ratio_displacement <= 1.0;
    }
    if (opts.emit_series) r.series["min_divisor"] = b_series;
  }
  r.notes.push_back(
      "theorem constants (L, G, beta2 conditions) are annotations, not asserted");
  r.pass = ok && r.all_finite();
  return r;
}

}  // namespace meritopt
