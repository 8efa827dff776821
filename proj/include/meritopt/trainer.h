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

// The outer training loop: per-source stochastic gradients, an aggregation
// weight vector per step, then one optimizer step on the weighted gradient.

#ifndef MERITOPT_TRAINER_H_
#define MERITOPT_TRAINER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "meritopt/opt_step.h"
#include "meritopt/problems.h"
#include "meritopt/simplex.h"
#include "meritopt/sources.h"
#include "meritopt/weight_solver.h"

namespace meritopt {

enum class TrainMode { kMeritOpt, kUniformWeights, kTargetOnly, kNoTarget };

std::string_view to_string(TrainMode mode);
TrainMode train_mode_from_string(std::string_view name);

struct StepSizeSchedule {
  enum class Kind { kConstant, kCosine };
  Kind kind = Kind::kConstant;
  double gamma_max = 0.1;
  // Cosine only. Defaults to gamma_max / 3 when left unset.
  std::optional<double> gamma_min;

  static StepSizeSchedule constant(double gamma) {
    return {Kind::kConstant, gamma, std::nullopt};
  }
  static StepSizeSchedule cosine(double gamma_max,
                                 std::optional<double> gamma_min = {}) {
    return {Kind::kCosine, gamma_max, gamma_min};
  }
  double resolved_min() const { return gamma_min.value_or(gamma_max / 3.0); }
  // Step size for step t of `total` steps.
  double at(int t, int total) const;
};

struct FixedBatch {
  // Exactly one of the three is used: per-source override, then fraction of
  // each source's size, then a common size.
  std::map<std::string, Eigen::Index> per_source;
  double fraction = 0.0;
  Eigen::Index size = 0;
};

struct AdaptiveBatch {
  Eigen::Index total = 512;
  Eigen::Index min = 32;
  Eigen::Index max = 128;
};

using BatchConfig = std::variant<FixedBatch, AdaptiveBatch>;

struct DropConfig {
  double threshold = 0.15;
  // Outer steps per epoch; 0 derives it from the target source.
  int epoch_len = 0;
  bool allow_target_drop = false;
};

struct CycleConfig {
  int period = 2;
  int meritopt_epochs = 1;
  int epoch_len = 0;
};

struct TwoPhaseConfig {
  int phase1_steps = 0;
  // Evaluations without validation improvement before switching early;
  // 0 disables the early switch.
  int patience = 10;
};

using Heuristic =
    std::variant<std::monostate, DropConfig, CycleConfig, TwoPhaseConfig>;

struct TrainConfig {
  int steps = 100;
  StepSizeSchedule step_size;
  OptimizerKind optimizer = OptimizerKind::kSgd;
  OptimizerHyper hyper;
  MdConfig md;
  BatchConfig batch = FixedBatch{{}, 0.1, 0};
  TrainMode mode = TrainMode::kMeritOpt;
  Heuristic heuristic;
  std::uint64_t seed = 0;
  int eval_every = 1;
  // Evaluate per-source gradients concurrently. Results do not depend on it.
  bool parallel_gradients = false;
  // Starting point; empty means zeros.
  Vector x0;
};

void validate(const TrainConfig& cfg);

struct TrajectoryRecord {
  int step = 0;
  std::string mode;  // effective mode tag for this step
  int phase = 0;     // two-phase runs: 1 or 2; otherwise 0
  // Indexed by training source; zero weight and NaN loss when inactive.
  Vector weights;
  Vector train_loss;
  std::vector<bool> active;
  double val_loss = 0.0;
  double grad_norm = 0.0;
  double wall_time_s = 0.0;
};

struct TrainResult {
  std::vector<TrajectoryRecord> records;
  Vector final_x;
  OptimizerState final_state;
  std::vector<std::string> source_ids;
  std::vector<bool> final_active;
  // Two-phase runs: first step of phase 2.
  std::optional<int> phase_switch_step;
};

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int step)
      : std::runtime_error(what + " at step " + std::to_string(step)),
        step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

// Weights for the non-adaptive baselines over the active sources:
// uniform-weights -> 1/n, target-only -> uniform over target-train sources,
// no-target -> uniform over the rest.
WeightVector fixed_mode_weights(TrainMode mode, const SourceRegistry& registry);

// At an epoch boundary, drops every unprotected active source whose weight is
// below `threshold` and renormalizes. `weights` are over the active set. If
// every active source would go, the argmax survives. No-op mid-epoch.
SourceRegistry apply_drop_heuristic(const WeightVector& weights,
                                    const SourceRegistry& registry,
                                    double threshold, bool at_epoch_boundary);

struct CycleDecision {
  bool full_meritopt = true;
  // Training-source index to use alone when !full_meritopt.
  std::size_t top1 = 0;
};

// Epochs with (epoch mod period) < meritopt_epochs run full weighting; the
// others train on the argmax of `last_weights` (lowest index on ties), or on
// `target_index` when no weighted epoch has run yet.
CycleDecision cycle_mode(int epoch_index, const CycleConfig& cfg,
                         const std::optional<WeightVector>& last_weights,
                         std::size_t target_index);

// Outer steps per epoch: ceil(target size / target batch size).
int epoch_length(const TrainConfig& cfg,
                 const std::vector<DataSource>& train_sources);

// Runs the configured mode and heuristic. `train_sources` must not contain the
// validation source.
TrainResult run(const TrainConfig& cfg,
                const std::vector<DataSource>& train_sources,
                const DataSource& validation, const LossModel& model);

// Uniform weighting first, then weighted training from the same parameters
// and optimizer state. Uses the TwoPhaseConfig in cfg.heuristic.
TrainResult run_two_phase(const TrainConfig& cfg,
                          const std::vector<DataSource>& train_sources,
                          const DataSource& validation, const LossModel& model);

// Stream ids used by the trainer, exposed so that tests can replay batches.
Rng batch_stream(std::uint64_t seed, std::string_view source_id, int step);
Rng validation_stream(std::uint64_t seed, int step);

// Batch size for each training source at one step, in source order.
std::vector<Eigen::Index> batch_sizes(const BatchConfig& batch,
                                      const std::vector<DataSource>& sources,
                                      const std::vector<std::size_t>& active);

}  // namespace meritopt

#endif  // MERITOPT_TRAINER_H_
