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

#include "meritopt/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <limits>
#include <numbers>

namespace meritopt {

std::string_view to_string(TrainMode mode) {
  switch (mode) {
    case TrainMode::kMeritOpt: return "meritopt";
    case TrainMode::kUniformWeights: return "uniform-weights";
    case TrainMode::kTargetOnly: return "target-only";
    case TrainMode::kNoTarget: return "no-target";
  }
  return "unknown";
}

TrainMode train_mode_from_string(std::string_view name) {
  if (name == "meritopt") return TrainMode::kMeritOpt;
  if (name == "uniform-weights") return TrainMode::kUniformWeights;
  if (name == "target-only") return TrainMode::kTargetOnly;
  if (name == "no-target") return TrainMode::kNoTarget;
  throw std::invalid_argument("unknown mode '" + std::string(name) + "'");
}

double StepSizeSchedule::at(int t, int total) const {
  if (kind == Kind::kConstant || total <= 1) return gamma_max;
  const double lo = resolved_min();
  const double frac = static_cast<double>(t) / static_cast<double>(total - 1);
  return lo + 0.5 * (gamma_max - lo) * (1.0 + std::cos(std::numbers::pi * frac));
}

void validate(const TrainConfig& cfg) {
  if (cfg.steps < 1) throw std::invalid_argument("steps must be >= 1");
  if (!(cfg.step_size.gamma_max > 0.0) || !std::isfinite(cfg.step_size.gamma_max)) {
    throw std::invalid_argument("step_size must be positive");
  }
  if (cfg.step_size.kind == StepSizeSchedule::Kind::kCosine) {
    const double lo = cfg.step_size.resolved_min();
    if (!(lo > 0.0) || lo > cfg.step_size.gamma_max) {
      throw std::invalid_argument("cosine schedule needs 0 < min <= max");
    }
  }
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  validate(cfg.optimizer, cfg.hyper);
  validate(cfg.md);
  if (const auto* fixed = std::get_if<FixedBatch>(&cfg.batch)) {
    if (fixed->per_source.empty() && !(fixed->fraction > 0.0) && fixed->size < 1) {
      throw std::invalid_argument("fixed batch needs per_source, fraction or size");
    }
    if (fixed->fraction < 0.0 || fixed->fraction > 1.0) {
      throw std::invalid_argument("batch fraction must lie in (0, 1]");
    }
  } else {
    const auto& ad = std::get<AdaptiveBatch>(cfg.batch);
    if (ad.min < 1 || ad.min > ad.max || ad.total < 1) {
      throw std::invalid_argument("adaptive batch needs 1 <= min <= max");
    }
  }
  if (const auto* d = std::get_if<DropConfig>(&cfg.heuristic)) {
    if (!(d->threshold > 0.0 && d->threshold < 1.0)) {
      throw std::invalid_argument("drop threshold must lie in (0, 1)");
    }
    if (d->epoch_len < 0) throw std::invalid_argument("epoch_len must be >= 0");
  }
  if (const auto* c = std::get_if<CycleConfig>(&cfg.heuristic)) {
    if (c->period < 1 || c->meritopt_epochs < 0 ||
        c->meritopt_epochs > c->period || c->epoch_len < 0) {
      throw std::invalid_argument(
          "cycle needs period >= 1 and 0 <= meritopt_epochs <= period");
    }
  }
  if (const auto* p = std::get_if<TwoPhaseConfig>(&cfg.heuristic)) {
    if (p->phase1_steps < 0 || p->phase1_steps > cfg.steps || p->patience < 0) {
      throw std::invalid_argument("two-phase needs 0 <= phase1_steps <= steps");
    }
  }
}

Rng batch_stream(std::uint64_t seed, std::string_view source_id, int step) {
  return make_stream(seed, source_id, static_cast<std::uint64_t>(step));
}

Rng validation_stream(std::uint64_t seed, int step) {
  return make_stream(seed, "\x01validation", static_cast<std::uint64_t>(step));
}

std::vector<Eigen::Index> batch_sizes(const BatchConfig& batch,
                                      const std::vector<DataSource>& sources,
                                      const std::vector<std::size_t>& active) {
  std::vector<Eigen::Index> out;
  out.reserve(active.size());
  if (const auto* fixed = std::get_if<FixedBatch>(&batch)) {
    for (std::size_t i : active) {
      const DataSource& s = sources.at(i);
      Eigen::Index b = 0;
      if (auto it = fixed->per_source.find(s.id); it != fixed->per_source.end()) {
        b = it->second;
      } else if (fixed->fraction > 0.0) {
        b = std::max<Eigen::Index>(
            1, std::llround(fixed->fraction * static_cast<double>(s.size())));
      } else {
        b = fixed->size;
      }
      if (b < 1 || b > s.size()) {
        throw std::invalid_argument("batch size for source '" + s.id +
                                    "' outside [1, size]");
      }
      out.push_back(b);
    }
    return out;
  }
  const auto& ad = std::get<AdaptiveBatch>(batch);
  std::vector<Eigen::Index> sizes;
  for (std::size_t i : active) sizes.push_back(sources.at(i).size());
  return allocate_adaptive_batches(sizes, ad.total, ad.min, ad.max).per_source;
}

WeightVector fixed_mode_weights(TrainMode mode, const SourceRegistry& registry) {
  const auto& active = registry.active_indices();
  const std::size_t n = active.size();
  Vector w = Vector::Zero(static_cast<Eigen::Index>(n));
  switch (mode) {
    case TrainMode::kMeritOpt:
      throw std::invalid_argument("meritopt mode has no fixed weights");
    case TrainMode::kUniformWeights:
      return WeightVector::uniform(n);
    case TrainMode::kTargetOnly:
    case TrainMode::kNoTarget: {
      const bool want_target = mode == TrainMode::kTargetOnly;
      for (std::size_t k = 0; k < n; ++k) {
        const bool is_target =
            registry.entry(active[k]).role == SourceRole::kTargetTrain;
        if (is_target == want_target) w[static_cast<Eigen::Index>(k)] = 1.0;
      }
      if (w.sum() == 0.0) {
        throw std::invalid_argument(want_target
                                        ? "target-only mode needs a target-train source"
                                        : "no-target mode needs a non-target source");
      }
      return WeightVector::normalized(w);
    }
  }
  throw std::logic_error("unhandled mode");
}

SourceRegistry apply_drop_heuristic(const WeightVector& weights,
                                    const SourceRegistry& registry,
                                    double threshold, bool at_epoch_boundary) {
  if (!at_epoch_boundary) return registry;
  const auto active = registry.active_indices();
  if (weights.size() != active.size()) {
    throw std::invalid_argument("weights do not match the active sources");
  }
  SourceRegistry current = registry;
  current.set_weights(weights);

  std::vector<std::size_t> doomed;
  for (std::size_t k = 0; k < active.size(); ++k) {
    if (weights[k] < threshold && !registry.is_protected(active[k])) {
      doomed.push_back(active[k]);
    }
  }
  if (doomed.size() == active.size()) {
    const std::size_t keep = active[weights.argmax()];
    doomed.erase(std::remove(doomed.begin(), doomed.end(), keep), doomed.end());
  }
  for (std::size_t idx : doomed) {
    current = drop_source(current, current.entry(idx).id);
  }
  return current;
}

CycleDecision cycle_mode(int epoch_index, const CycleConfig& cfg,
                         const std::optional<WeightVector>& last_weights,
                         std::size_t target_index) {
  if (cfg.period < 1 || cfg.meritopt_epochs < 0 || epoch_index < 0) {
    throw std::invalid_argument("invalid cycle configuration");
  }
  CycleDecision d;
  d.full_meritopt = (epoch_index % cfg.period) < cfg.meritopt_epochs;
  d.top1 = last_weights ? last_weights->argmax() : target_index;
  return d;
}

int epoch_length(const TrainConfig& cfg,
                 const std::vector<DataSource>& train_sources) {
  std::size_t target = 0;
  for (std::size_t i = 0; i < train_sources.size(); ++i) {
    if (train_sources[i].role == SourceRole::kTargetTrain) {
      target = i;
      break;
    }
  }
  std::vector<std::size_t> all(train_sources.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto sizes = batch_sizes(cfg.batch, train_sources, all);
  const Eigen::Index n = train_sources.at(target).size();
  const Eigen::Index b = sizes.at(target);
  return static_cast<int>((n + b - 1) / b);
}

namespace {

struct StepSources {
  std::vector<Vector> grads;       // active order
  std::vector<double> losses;      // active order
};

// Holds the evolving state of one training run.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, const std::vector<DataSource>& sources,
          const DataSource& validation, const LossModel& model)
      : cfg_(cfg),
        sources_(sources),
        validation_(validation),
        model_(model),
        registry_(make_registry(sources, cfg)),
        state_(cfg.optimizer, cfg.hyper, model.dim()),
        start_(std::chrono::steady_clock::now()) {
    validate(cfg);
    if (sources.empty()) throw std::invalid_argument("no training sources");
    for (const auto& s : sources) {
      if (s.role == SourceRole::kTargetValidation) {
        throw std::invalid_argument("validation source '" + s.id +
                                    "' listed as a training source");
      }
      require_same_dim(s.width(), model.sample_width(),
                       "source width does not match the model");
    }
    require_same_dim(validation.width(), model.sample_width(),
                     "validation width does not match the model");
    x_ = cfg.x0.size() == 0 ? Vector(Vector::Zero(model.dim())) : cfg.x0;
    require_same_dim(x_.size(), model.dim(), "x0 dimension mismatch");
    for (std::size_t i = 0; i < sources.size(); ++i) {
      if (sources[i].role == SourceRole::kTargetTrain) {
        target_index_ = i;
        break;
      }
    }
  }

  // One outer step. `forced` overrides the weights (cycle top-1 epochs);
  // otherwise `mode` decides.
  void step(TrainMode mode, const std::optional<std::size_t>& top1, int phase) {
    const int t = t_;
    const auto& active = registry_.active_indices();
    const StepSources ss = gradients(t, active);

    WeightVector w;
    std::string tag;
    if (top1) {
      const auto pos = std::find(active.begin(), active.end(), *top1);
      const std::size_t k =
          pos == active.end() ? 0 : static_cast<std::size_t>(pos - active.begin());
      w = WeightVector::vertex(active.size(), k);
      tag = "top1-only";
    } else if (mode == TrainMode::kMeritOpt) {
      const double gamma = cfg_.step_size.at(t, cfg_.steps);
      PhiProblem problem(x_, ss.grads, gamma, state_, model_, &validation_);
      const WeightVector init = cfg_.md.warm_start
                                    ? registry_.weights()
                                    : WeightVector::uniform(active.size());
      Rng rng = validation_stream(cfg_.seed, t);
      try {
        w = solve_weights(problem, cfg_.md, init, rng);
      } catch (const NumericalError& e) {
        throw TrainingError(e.what(), t);
      }
      tag = std::string(to_string(mode));
    } else {
      w = fixed_mode_weights(mode, registry_);
      tag = std::string(to_string(mode));
    }
    registry_.set_weights(w);

    Vector g = Vector::Zero(x_.size());
    for (std::size_t k = 0; k < active.size(); ++k) g += w[k] * ss.grads[k];
    x_ = opt_step(state_, x_, g, cfg_.step_size.at(t, cfg_.steps));
    if (!x_.allFinite()) throw TrainingError("non-finite parameters", t);

    ++t_;
    last_val_loss_.reset();
    if (t_ % cfg_.eval_every == 0) record(tag, phase, ss);
  }

  int t() const { return t_; }
  const SourceRegistry& registry() const { return registry_; }
  SourceRegistry& registry() { return registry_; }
  std::size_t target_index() const { return target_index_; }
  const std::optional<double>& last_val_loss() const { return last_val_loss_; }

  TrainResult finish() {
    TrainResult r;
    r.records = std::move(records_);
    r.final_x = x_;
    r.final_state = state_;
    for (const auto& s : sources_) r.source_ids.push_back(s.id);
    r.final_active.assign(sources_.size(), false);
    for (std::size_t i : registry_.active_indices()) r.final_active[i] = true;
    return r;
  }

 private:
  static SourceRegistry make_registry(const std::vector<DataSource>& sources,
                                      const TrainConfig& cfg) {
    std::vector<SourceRegistry::Entry> entries;
    for (const auto& s : sources) entries.push_back({s.id, s.role});
    bool allow = false;
    if (const auto* d = std::get_if<DropConfig>(&cfg.heuristic)) {
      allow = d->allow_target_drop;
    }
    return SourceRegistry(std::move(entries), allow);
  }

  StepSources gradients(int t, const std::vector<std::size_t>& active) {
    const auto sizes = batch_sizes(cfg_.batch, sources_, active);
    StepSources out;
    out.grads.resize(active.size());
    out.losses.resize(active.size());
    auto work = [&](std::size_t k) {
      const DataSource& src = sources_[active[k]];
      Rng rng = batch_stream(cfg_.seed, src.id, t);
      const SampleSet batch = sample_minibatch(src, sizes[k], rng);
      out.grads[k] = model_.gradient(batch, x_);
      out.losses[k] = model_.loss(batch, x_);
    };
    if (cfg_.parallel_gradients && active.size() > 1) {
      std::vector<std::future<void>> jobs;
      jobs.reserve(active.size());
      for (std::size_t k = 0; k < active.size(); ++k) {
        jobs.push_back(std::async(std::launch::async, work, k));
      }
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t k = 0; k < active.size(); ++k) work(k);
    }
    for (std::size_t k = 0; k < active.size(); ++k) {
      if (!std::isfinite(out.losses[k]) || !out.grads[k].allFinite()) {
        throw TrainingError("non-finite training loss on source '" +
                                sources_[active[k]].id + "'",
                            t);
      }
    }
    return out;
  }

  void record(const std::string& tag, int phase, const StepSources& ss) {
    TrajectoryRecord rec;
    rec.step = t_;
    rec.mode = tag;
    rec.phase = phase;
    const auto n = static_cast<Eigen::Index>(sources_.size());
    rec.weights = registry_.full_weights();
    rec.train_loss =
        Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
    rec.active.assign(sources_.size(), false);
    const auto& active = registry_.active_indices();
    for (std::size_t k = 0; k < active.size(); ++k) {
      rec.train_loss[static_cast<Eigen::Index>(active[k])] = ss.losses[k];
      rec.active[active[k]] = true;
    }
    rec.val_loss = model_.loss(validation_.samples, x_);
    rec.grad_norm = model_.gradient(validation_.samples, x_).norm();
    if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.grad_norm)) {
      throw TrainingError("non-finite validation loss", t_);
    }
    rec.wall_time_s = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start_)
                          .count();
    last_val_loss_ = rec.val_loss;
    records_.push_back(std::move(rec));
  }

  const TrainConfig& cfg_;
  const std::vector<DataSource>& sources_;
  const DataSource& validation_;
  const LossModel& model_;
  SourceRegistry registry_;
  OptimizerState state_;
  Vector x_;
  int t_ = 0;
  std::size_t target_index_ = 0;
  std::vector<TrajectoryRecord> records_;
  std::optional<double> last_val_loss_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

TrainResult run(const TrainConfig& cfg,
                const std::vector<DataSource>& train_sources,
                const DataSource& validation, const LossModel& model) {
  if (std::holds_alternative<TwoPhaseConfig>(cfg.heuristic)) {
    return run_two_phase(cfg, train_sources, validation, model);
  }
  Trainer trainer(cfg, train_sources, validation, model);

  if (const auto* drop = std::get_if<DropConfig>(&cfg.heuristic)) {
    const int epoch =
        drop->epoch_len > 0 ? drop->epoch_len : epoch_length(cfg, train_sources);
    for (int t = 0; t < cfg.steps; ++t) {
      trainer.step(cfg.mode, std::nullopt, 0);
      const bool boundary = trainer.t() % epoch == 0;
      trainer.registry() = apply_drop_heuristic(
          trainer.registry().weights(), trainer.registry(), drop->threshold,
          boundary);
    }
    return trainer.finish();
  }

  if (const auto* cycle = std::get_if<CycleConfig>(&cfg.heuristic)) {
    const int epoch = cycle->epoch_len > 0 ? cycle->epoch_len
                                           : epoch_length(cfg, train_sources);
    std::optional<WeightVector> last;
    for (int t = 0; t < cfg.steps; ++t) {
      const CycleDecision d =
          cycle_mode(t / epoch, *cycle, last, trainer.target_index());
      if (d.full_meritopt) {
        trainer.step(cfg.mode, std::nullopt, 0);
        last = trainer.registry().weights();
      } else {
        trainer.step(cfg.mode, d.top1, 0);
      }
    }
    return trainer.finish();
  }

  for (int t = 0; t < cfg.steps; ++t) trainer.step(cfg.mode, std::nullopt, 0);
  return trainer.finish();
}

TrainResult run_two_phase(const TrainConfig& cfg,
                          const std::vector<DataSource>& train_sources,
                          const DataSource& validation, const LossModel& model) {
  const auto* two = std::get_if<TwoPhaseConfig>(&cfg.heuristic);
  if (two == nullptr) {
    throw std::invalid_argument("run_two_phase needs a two-phase heuristic");
  }
  Trainer trainer(cfg, train_sources, validation, model);
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  while (trainer.t() < two->phase1_steps) {
    trainer.step(TrainMode::kUniformWeights, std::nullopt, 1);
    if (const auto& v = trainer.last_val_loss()) {
      if (*v < best) {
        best = *v;
        stale = 0;
      } else if (two->patience > 0 && ++stale >= two->patience) {
        break;
      }
    }
  }
  const int switch_step = trainer.t();
  while (trainer.t() < cfg.steps) {
    trainer.step(TrainMode::kMeritOpt, std::nullopt, 2);
  }
  TrainResult r = trainer.finish();
  r.phase_switch_step = switch_step;
  return r;
}

}  // namespace meritopt
