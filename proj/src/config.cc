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

#include "meritopt/config.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace meritopt {
namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

// Typed, key-checked access to one JSON object.
class ObjectReader {
 public:
  ObjectReader(const Json& obj, std::string prefix)
      : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) {
      throw ConfigError(prefix_.empty() ? "<root>" : prefix_, "expected an object");
    }
  }

  void allow_only(std::initializer_list<const char*> keys) const {
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items()) {
      if (!allowed.count(k)) throw ConfigError(key(k), "unknown key");
    }
  }

  bool has(const char* k) const { return obj_.contains(k) && !obj_.at(k).is_null(); }
  const Json& raw(const char* k) const { return obj_.at(k); }
  std::string key(const std::string& k) const { return join_key(prefix_, k); }

  double number(const char* k, double def) const {
    if (!has(k)) return def;
    const Json& v = obj_.at(k);
    if (!v.is_number()) throw ConfigError(key(k), "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError(key(k), "must be finite");
    return d;
  }

  std::int64_t integer(const char* k, std::int64_t def) const {
    if (!has(k)) return def;
    const Json& v = obj_.at(k);
    if (!v.is_number_integer()) throw ConfigError(key(k), "expected an integer");
    return v.get<std::int64_t>();
  }

  std::uint64_t unsigned_integer(const char* k, std::uint64_t def) const {
    if (!has(k)) return def;
    const Json& v = obj_.at(k);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(key(k), "expected a nonnegative integer");
    }
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }

  bool boolean(const char* k, bool def) const {
    if (!has(k)) return def;
    const Json& v = obj_.at(k);
    if (!v.is_boolean()) throw ConfigError(key(k), "expected true or false");
    return v.get<bool>();
  }

  std::string string(const char* k, const std::string& def) const {
    if (!has(k)) return def;
    const Json& v = obj_.at(k);
    if (!v.is_string()) throw ConfigError(key(k), "expected a string");
    return v.get<std::string>();
  }

  std::string required_string(const char* k) const {
    if (!has(k)) throw ConfigError(key(k), "required");
    return string(k, "");
  }

  template <typename F>
  auto enumerated(const char* k, const std::string& def, F&& convert) const {
    const std::string name = string(k, def);
    try {
      return convert(name);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key(k), e.what());
    }
  }

 private:
  const Json& obj_;
  std::string prefix_;
};

void require(bool cond, const std::string& key, const std::string& what) {
  if (!cond) throw ConfigError(key, what);
}

std::uint64_t derive_seed(std::uint64_t seed, const std::string& id) {
  Rng rng = make_stream(seed, id, 0xdecafULL);
  return rng() >> 1;  // keep within the signed JSON integer range
}

MeanSpec parse_mean(const Json& j, const std::string& prefix,
                    std::uint64_t source_seed) {
  if (j.is_string()) {
    return parse_mean(Json{{"kind", j.get<std::string>()}}, prefix, source_seed);
  }
  ObjectReader r(j, prefix);
  r.allow_only({"kind", "mu", "seed"});
  MeanSpec m;
  m.kind = r.enumerated("kind", "zero", mean_kind_from_string);
  if (m.kind == MeanSpec::Kind::kScaledOnes) m.mu = r.number("mu", 0.0);
  if (m.kind == MeanSpec::Kind::kRandomUnit) {
    m.seed = r.unsigned_integer("seed", derive_seed(source_seed, "random-unit"));
  }
  if (m.kind != MeanSpec::Kind::kScaledOnes && r.has("mu")) {
    throw ConfigError(r.key("mu"), "only valid for scaled-ones");
  }
  if (m.kind != MeanSpec::Kind::kRandomUnit && r.has("seed")) {
    throw ConfigError(r.key("seed"), "only valid for random-unit");
  }
  return m;
}

SourceDecl parse_source(const Json& j, const std::string& prefix,
                        std::uint64_t experiment_seed) {
  ObjectReader r(j, prefix);
  r.allow_only({"id", "kind", "role", "size", "mean", "noise", "seed", "path",
                "target_distribution"});
  SourceDecl s;
  s.id = r.required_string("id");
  require(!s.id.empty(), r.key("id"), "must not be empty");
  s.kind = r.enumerated("kind", "gaussian", source_kind_from_string);
  s.role = r.enumerated("role", "auxiliary", source_role_from_string);
  s.seed = r.unsigned_integer("seed", derive_seed(experiment_seed, s.id));
  s.target_distribution =
      r.boolean("target_distribution", s.role != SourceRole::kAuxiliary);
  if (s.kind == SourceKind::kFile) {
    s.path = r.required_string("path");
    for (const char* k : {"size", "mean", "noise"}) {
      if (r.has(k)) throw ConfigError(r.key(k), "not valid for file sources");
    }
    return s;
  }
  if (r.has("path")) throw ConfigError(r.key("path"), "only valid for file sources");
  s.size = r.integer("size", 0);
  require(s.size >= 1, r.key("size"), "must be >= 1");
  s.mean = r.has("mean") ? parse_mean(r.raw("mean"), r.key("mean"), s.seed)
                         : MeanSpec::zero();
  s.noise = r.number("noise", 1.0);
  require(s.noise >= 0.0, r.key("noise"), "must be >= 0");
  if (s.kind == SourceKind::kClassification && r.has("noise")) {
    throw ConfigError(r.key("noise"), "not valid for classification sources");
  }
  return s;
}

Json mean_to_json(const MeanSpec& m) {
  Json j;
  j["kind"] = std::string(to_string(m.kind));
  if (m.kind == MeanSpec::Kind::kScaledOnes) j["mu"] = m.mu;
  if (m.kind == MeanSpec::Kind::kRandomUnit) j["seed"] = m.seed;
  return j;
}

StepSizeSchedule parse_step_size(const Json& j) {
  if (j.is_number()) {
    const double g = j.get<double>();
    require(g > 0.0 && std::isfinite(g), "step_size", "must be positive");
    return StepSizeSchedule::constant(g);
  }
  ObjectReader r(j, "step_size");
  r.allow_only({"schedule", "max", "min"});
  const std::string kind = r.string("schedule", "constant");
  StepSizeSchedule s;
  if (kind == "constant") {
    s = StepSizeSchedule::constant(r.number("max", 0.1));
    if (r.has("min")) throw ConfigError(r.key("min"), "only valid for cosine");
  } else if (kind == "cosine") {
    s.kind = StepSizeSchedule::Kind::kCosine;
    s.gamma_max = r.number("max", 0.1);
    s.gamma_min = r.number("min", s.gamma_max / 3.0);
    require(*s.gamma_min > 0.0 && *s.gamma_min <= s.gamma_max, r.key("min"),
            "must satisfy 0 < min <= max");
  } else {
    throw ConfigError(r.key("schedule"), "expected constant or cosine");
  }
  require(s.gamma_max > 0.0, r.key("max"), "must be positive");
  return s;
}

Json step_size_to_json(const StepSizeSchedule& s) {
  Json j;
  if (s.kind == StepSizeSchedule::Kind::kConstant) {
    j["schedule"] = "constant";
    j["max"] = s.gamma_max;
  } else {
    j["schedule"] = "cosine";
    j["max"] = s.gamma_max;
    j["min"] = s.resolved_min();
  }
  return j;
}

}  // namespace

ExperimentConfig parse_config(const Json& doc) {
  ObjectReader r(doc, "");
  r.allow_only({"problem", "dim", "sources", "x0", "steps", "step_size",
                "optimizer", "md", "batch", "mode", "heuristic", "seed",
                "eval_every", "parallel_gradients", "output", "verify"});
  ExperimentConfig cfg;
  if (!r.has("problem")) throw ConfigError("problem", "required");
  cfg.problem = r.enumerated("problem", "", model_kind_from_string);
  cfg.dim = r.integer("dim", 20);
  require(cfg.dim >= 1, "dim", "must be >= 1");

  TrainConfig& t = cfg.train;
  t.seed = r.unsigned_integer("seed", 0);
  if (!r.has("steps")) throw ConfigError("steps", "required");
  const auto steps = r.integer("steps", 0);
  require(steps >= 1 && steps <= 100000000, "steps", "must be >= 1");
  t.steps = static_cast<int>(steps);
  t.eval_every = static_cast<int>(r.integer("eval_every", 1));
  require(t.eval_every >= 1, "eval_every", "must be >= 1");
  t.parallel_gradients = r.boolean("parallel_gradients", false);
  t.mode = r.enumerated("mode", "meritopt", train_mode_from_string);
  t.step_size = r.has("step_size") ? parse_step_size(r.raw("step_size"))
                                   : StepSizeSchedule::constant(0.1);

  // sources
  if (!r.has("sources") || !r.raw("sources").is_array() ||
      r.raw("sources").empty()) {
    throw ConfigError("sources", "expected a nonempty array");
  }
  std::set<std::string> ids;
  int validation_count = 0;
  int train_count = 0;
  for (std::size_t i = 0; i < r.raw("sources").size(); ++i) {
    const std::string prefix = "sources[" + std::to_string(i) + "]";
    SourceDecl s = parse_source(r.raw("sources")[i], prefix, t.seed);
    require(ids.insert(s.id).second, prefix + ".id", "duplicate id '" + s.id + "'");
    if (s.role == SourceRole::kTargetValidation) {
      ++validation_count;
    } else {
      ++train_count;
    }
    cfg.sources.push_back(std::move(s));
  }
  require(validation_count <= 1, "sources",
          "at most one target-validation source is allowed");
  require(train_count >= 1, "sources", "needs at least one training source");

  // x0
  if (r.has("x0")) {
    ObjectReader xr(r.raw("x0"), "x0");
    xr.allow_only({"kind", "value", "values"});
    const std::string kind = xr.string("kind", "zeros");
    if (kind == "zeros") {
      cfg.x0.kind = X0Spec::Kind::kZeros;
    } else if (kind == "constant") {
      cfg.x0.kind = X0Spec::Kind::kConstant;
      cfg.x0.value = xr.number("value", 0.0);
    } else if (kind == "values") {
      cfg.x0.kind = X0Spec::Kind::kValues;
      if (!xr.has("values") || !xr.raw("values").is_array()) {
        throw ConfigError("x0.values", "expected an array of numbers");
      }
      for (const auto& v : xr.raw("values")) {
        if (!v.is_number()) throw ConfigError("x0.values", "expected numbers");
        cfg.x0.values.push_back(v.get<double>());
      }
      require(static_cast<Eigen::Index>(cfg.x0.values.size()) == cfg.dim,
              "x0.values", "length must equal dim");
    } else {
      throw ConfigError("x0.kind", "expected zeros, constant or values");
    }
  }

  // optimizer
  if (r.has("optimizer")) {
    const Json& o = r.raw("optimizer");
    if (o.is_string()) {
      try {
        t.optimizer = optimizer_kind_from_string(o.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw ConfigError("optimizer", e.what());
      }
    } else {
      ObjectReader orr(o, "optimizer");
      orr.allow_only({"kind", "beta1", "beta2", "eps", "b0"});
      t.optimizer = orr.enumerated("kind", "sgd", optimizer_kind_from_string);
      t.hyper.beta1 = orr.number("beta1", t.hyper.beta1);
      t.hyper.beta2 = orr.number("beta2", t.hyper.beta2);
      t.hyper.eps = orr.number("eps", t.hyper.eps);
      t.hyper.b0 = orr.number("b0", t.hyper.b0);
    }
    require(t.hyper.beta1 >= 0.0 && t.hyper.beta1 < 1.0, "optimizer.beta1",
            "must lie in [0, 1)");
    require(t.hyper.beta2 >= 0.0 && t.hyper.beta2 < 1.0, "optimizer.beta2",
            "must lie in [0, 1)");
    require(t.hyper.eps > 0.0, "optimizer.eps", "must be positive");
    require(t.hyper.b0 > 0.0, "optimizer.b0", "must be positive");
  }

  // md
  if (r.has("md")) {
    ObjectReader mr(r.raw("md"), "md");
    mr.allow_only({"eta", "iterations", "val_batch_size", "resample_val_per_iter",
                   "warm_start", "grad_mode"});
    t.md.eta = mr.number("eta", t.md.eta);
    require(t.md.eta > 0.0, "md.eta", "must be positive");
    const auto iters = mr.integer("iterations", t.md.iterations);
    require(iters >= 0 && iters <= 1000000, "md.iterations", "must be >= 0");
    t.md.iterations = static_cast<int>(iters);
    t.md.val_batch_size = mr.integer("val_batch_size", t.md.val_batch_size);
    require(t.md.val_batch_size >= 1, "md.val_batch_size", "must be >= 1");
    t.md.resample_val_per_iter =
        mr.boolean("resample_val_per_iter", t.md.resample_val_per_iter);
    t.md.warm_start = mr.boolean("warm_start", t.md.warm_start);
    t.md.grad_mode = mr.enumerated("grad_mode", "finite-difference",
                                   phi_grad_mode_from_string);
  }
  for (const auto& s : cfg.sources) {
    if (s.role == SourceRole::kTargetValidation && s.kind != SourceKind::kFile) {
      require(t.md.val_batch_size <= s.size, "md.val_batch_size",
              "exceeds the validation set size");
    }
  }

  // batch
  if (r.has("batch")) {
    ObjectReader br(r.raw("batch"), "batch");
    const std::string kind = br.string("kind", "fixed");
    if (kind == "fixed") {
      br.allow_only({"kind", "fraction", "size", "per_source"});
      FixedBatch fb;
      fb.fraction = br.number("fraction", 0.0);
      fb.size = br.integer("size", 0);
      if (br.has("per_source")) {
        ObjectReader pr(br.raw("per_source"), "batch.per_source");
        for (const auto& [k, v] : br.raw("per_source").items()) {
          require(ids.count(k) > 0, pr.key(k), "unknown source id");
          if (!v.is_number_integer() || v.get<std::int64_t>() < 1) {
            throw ConfigError(pr.key(k), "expected a positive integer");
          }
          fb.per_source[k] = v.get<std::int64_t>();
        }
      }
      const int chosen = (fb.fraction != 0.0) + (fb.size != 0) +
                         (!fb.per_source.empty());
      require(chosen >= 1, "batch", "fixed batch needs fraction, size or per_source");
      require(fb.fraction >= 0.0 && fb.fraction <= 1.0, "batch.fraction",
              "must lie in (0, 1]");
      require(fb.size >= 0, "batch.size", "must be >= 1");
      t.batch = fb;
    } else if (kind == "adaptive") {
      br.allow_only({"kind", "total", "min", "max"});
      AdaptiveBatch ab;
      ab.total = br.integer("total", ab.total);
      ab.min = br.integer("min", ab.min);
      ab.max = br.integer("max", ab.max);
      require(ab.min >= 1, "batch.min", "must be >= 1");
      require(ab.max >= ab.min, "batch.max", "must be >= batch.min");
      require(ab.min * train_count <= ab.total, "batch.total",
              "infeasible batch plan");
      t.batch = ab;
    } else {
      throw ConfigError("batch.kind", "expected fixed or adaptive");
    }
  }

  // heuristic
  if (r.has("heuristic")) {
    ObjectReader hr(r.raw("heuristic"), "heuristic");
    const std::string kind = hr.required_string("kind");
    if (kind == "drop") {
      hr.allow_only({"kind", "threshold", "epoch_len", "allow_target_drop"});
      DropConfig d;
      d.threshold = hr.number("threshold", d.threshold);
      require(d.threshold > 0.0 && d.threshold < 1.0, "heuristic.threshold",
              "must lie in (0, 1)");
      d.epoch_len = static_cast<int>(hr.integer("epoch_len", 0));
      require(d.epoch_len >= 0, "heuristic.epoch_len", "must be >= 0");
      d.allow_target_drop = hr.boolean("allow_target_drop", false);
      t.heuristic = d;
    } else if (kind == "cycle") {
      hr.allow_only({"kind", "period", "meritopt_epochs", "epoch_len"});
      CycleConfig c;
      c.period = static_cast<int>(hr.integer("period", c.period));
      c.meritopt_epochs =
          static_cast<int>(hr.integer("meritopt_epochs", c.meritopt_epochs));
      c.epoch_len = static_cast<int>(hr.integer("epoch_len", 0));
      require(c.period >= 1, "heuristic.period", "must be >= 1");
      require(c.meritopt_epochs >= 0 && c.meritopt_epochs <= c.period,
              "heuristic.meritopt_epochs", "must lie in [0, period]");
      require(c.epoch_len >= 0, "heuristic.epoch_len", "must be >= 0");
      t.heuristic = c;
    } else if (kind == "two-phase") {
      hr.allow_only({"kind", "phase1_steps", "patience"});
      TwoPhaseConfig p;
      p.phase1_steps = static_cast<int>(hr.integer("phase1_steps", 0));
      p.patience = static_cast<int>(hr.integer("patience", p.patience));
      require(p.phase1_steps >= 0 && p.phase1_steps <= t.steps,
              "heuristic.phase1_steps", "must lie in [0, steps]");
      require(p.patience >= 0, "heuristic.patience", "must be >= 0");
      t.heuristic = p;
    } else {
      throw ConfigError("heuristic.kind", "expected drop, cycle or two-phase");
    }
  }

  // output
  if (r.has("output")) {
    ObjectReader outr(r.raw("output"), "output");
    outr.allow_only({"dir", "formats"});
    cfg.out_dir = outr.string("dir", cfg.out_dir);
    if (outr.has("formats")) {
      const Json& f = outr.raw("formats");
      if (!f.is_array()) throw ConfigError("output.formats", "expected an array");
      cfg.formats.clear();
      for (const auto& v : f) {
        if (!v.is_string() ||
            (v.get<std::string>() != "csv" && v.get<std::string>() != "jsonl")) {
          throw ConfigError("output.formats", "expected \"csv\" or \"jsonl\"");
        }
        cfg.formats.push_back(v.get<std::string>());
      }
    }
  }

  // verify
  if (r.has("verify")) {
    ObjectReader vr(r.raw("verify"), "verify");
    vr.allow_only({"trials", "batch_size", "tolerance", "grid_step", "window",
                   "sigma_star_sq", "delta_hat", "stream", "bound",
                   "optimizer_steps", "optimizer_dim"});
    VerifyConfig& v = cfg.verify;
    v.trials = vr.integer("trials", v.trials);
    require(v.trials >= 1000, "verify.trials", "must be >= 1000");
    v.batch_size = vr.integer("batch_size", v.batch_size);
    require(v.batch_size >= 1, "verify.batch_size", "must be >= 1");
    v.tolerance = vr.number("tolerance", v.tolerance);
    require(v.tolerance >= 0.0, "verify.tolerance", "must be >= 0");
    v.grid_step = vr.number("grid_step", v.grid_step);
    require(v.grid_step >= 0.0 && v.grid_step <= 1.0, "verify.grid_step",
            "must lie in [0, 1]");
    v.window = static_cast<int>(vr.integer("window", v.window));
    require(v.window >= 1, "verify.window", "must be >= 1");
    if (vr.has("sigma_star_sq")) v.sigma_star_sq = vr.number("sigma_star_sq", 0.0);
    if (vr.has("delta_hat")) v.delta_hat = vr.number("delta_hat", 0.0);
    v.stream = vr.string("stream", v.stream);
    require(v.stream == "unit" || v.stream == "bounded" || v.stream == "zero",
            "verify.stream", "expected unit, bounded or zero");
    v.bound = vr.number("bound", v.bound);
    require(v.bound > 0.0, "verify.bound", "must be positive");
    v.optimizer_steps = static_cast<int>(vr.integer("optimizer_steps", v.optimizer_steps));
    require(v.optimizer_steps >= 100, "verify.optimizer_steps", "must be >= 100");
    v.optimizer_dim = vr.integer("optimizer_dim", v.optimizer_dim);
    require(v.optimizer_dim >= 1, "verify.optimizer_dim", "must be >= 1");
  }

  t.x0 = materialize_x0(cfg);
  return cfg;
}

SourceDecl parse_source_decl(const Json& doc, std::uint64_t experiment_seed) {
  return parse_source(doc, "source", experiment_seed);
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("<file>", "cannot open " + path.string());
  Json doc;
  try {
    doc = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(doc);
}

Json to_json(const ExperimentConfig& cfg) {
  const TrainConfig& t = cfg.train;
  Json j;
  j["problem"] = std::string(to_string(cfg.problem));
  j["dim"] = cfg.dim;
  j["seed"] = t.seed;
  j["steps"] = t.steps;
  j["eval_every"] = t.eval_every;
  j["parallel_gradients"] = t.parallel_gradients;
  j["mode"] = std::string(to_string(t.mode));
  j["step_size"] = step_size_to_json(t.step_size);

  Json sources = Json::array();
  for (const auto& s : cfg.sources) {
    Json js;
    js["id"] = s.id;
    js["kind"] = std::string(to_string(s.kind));
    js["role"] = std::string(to_string(s.role));
    js["seed"] = s.seed;
    js["target_distribution"] = s.target_distribution;
    if (s.kind == SourceKind::kFile) {
      js["path"] = s.path;
    } else {
      js["size"] = s.size;
      js["mean"] = mean_to_json(s.mean);
      if (s.kind != SourceKind::kClassification) js["noise"] = s.noise;
    }
    sources.push_back(std::move(js));
  }
  j["sources"] = std::move(sources);

  Json x0;
  switch (cfg.x0.kind) {
    case X0Spec::Kind::kZeros: x0["kind"] = "zeros"; break;
    case X0Spec::Kind::kConstant:
      x0["kind"] = "constant";
      x0["value"] = cfg.x0.value;
      break;
    case X0Spec::Kind::kValues:
      x0["kind"] = "values";
      x0["values"] = cfg.x0.values;
      break;
  }
  j["x0"] = std::move(x0);

  j["optimizer"] = {{"kind", std::string(to_string(t.optimizer))},
                    {"beta1", t.hyper.beta1},
                    {"beta2", t.hyper.beta2},
                    {"eps", t.hyper.eps},
                    {"b0", t.hyper.b0}};
  j["md"] = {{"eta", t.md.eta},
             {"iterations", t.md.iterations},
             {"val_batch_size", t.md.val_batch_size},
             {"resample_val_per_iter", t.md.resample_val_per_iter},
             {"warm_start", t.md.warm_start},
             {"grad_mode", std::string(to_string(t.md.grad_mode))}};

  if (const auto* fb = std::get_if<FixedBatch>(&t.batch)) {
    Json b;
    b["kind"] = "fixed";
    if (fb->fraction != 0.0) b["fraction"] = fb->fraction;
    if (fb->size != 0) b["size"] = fb->size;
    if (!fb->per_source.empty()) {
      Json ps = Json::object();
      for (const auto& [k, v] : fb->per_source) ps[k] = v;
      b["per_source"] = std::move(ps);
    }
    j["batch"] = std::move(b);
  } else {
    const auto& ab = std::get<AdaptiveBatch>(t.batch);
    j["batch"] = {{"kind", "adaptive"}, {"total", ab.total}, {"min", ab.min},
                  {"max", ab.max}};
  }

  if (const auto* d = std::get_if<DropConfig>(&t.heuristic)) {
    j["heuristic"] = {{"kind", "drop"},
                      {"threshold", d->threshold},
                      {"epoch_len", d->epoch_len},
                      {"allow_target_drop", d->allow_target_drop}};
  } else if (const auto* c = std::get_if<CycleConfig>(&t.heuristic)) {
    j["heuristic"] = {{"kind", "cycle"},
                      {"period", c->period},
                      {"meritopt_epochs", c->meritopt_epochs},
                      {"epoch_len", c->epoch_len}};
  } else if (const auto* p = std::get_if<TwoPhaseConfig>(&t.heuristic)) {
    j["heuristic"] = {{"kind", "two-phase"},
                      {"phase1_steps", p->phase1_steps},
                      {"patience", p->patience}};
  }

  j["output"] = {{"dir", cfg.out_dir}, {"formats", cfg.formats}};

  const VerifyConfig& v = cfg.verify;
  Json jv = {{"trials", v.trials},
             {"batch_size", v.batch_size},
             {"tolerance", v.tolerance},
             {"grid_step", v.grid_step},
             {"window", v.window},
             {"stream", v.stream},
             {"bound", v.bound},
             {"optimizer_steps", v.optimizer_steps},
             {"optimizer_dim", v.optimizer_dim}};
  if (v.sigma_star_sq) jv["sigma_star_sq"] = *v.sigma_star_sq;
  if (v.delta_hat) jv["delta_hat"] = *v.delta_hat;
  j["verify"] = std::move(jv);
  return j;
}

namespace {

Json appendix_b_sources() {
  return Json::array({
      {{"id", "D1"}, {"kind", "gaussian"}, {"role", "target-train"}, {"size", 20},
       {"mean", {{"kind", "zero"}}}},
      {{"id", "D2"}, {"kind", "gaussian"}, {"role", "auxiliary"}, {"size", 1000},
       {"mean", {{"kind", "scaled-ones"}, {"mu", 1e-4}}}},
      {{"id", "D3"}, {"kind", "gaussian"}, {"role", "auxiliary"}, {"size", 1000},
       {"mean", {{"kind", "random-unit"}}}},
      {{"id", "val"}, {"kind", "gaussian"}, {"role", "target-validation"},
       {"size", 100}, {"mean", {{"kind", "zero"}}}},
  });
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"appendixB", "md-ablation", "variance-G4", "quadratic", "delta",
          "optimizer"};
}

Json preset_json(const std::string& name) {
  if (name == "appendixB" || name == "md-ablation" || name == "delta") {
    Json j;
    j["problem"] = "mean-estimation";
    j["dim"] = 20;
    j["sources"] = appendix_b_sources();
    j["x0"] = {{"kind", "constant"}, {"value", 1.0}};
    j["steps"] = 2000;
    j["step_size"] = 0.1;
    j["optimizer"] = "sgd";
    j["md"] = {{"eta", 10.0}, {"iterations", 5}, {"val_batch_size", 10}};
    j["batch"] = {{"kind", "fixed"}, {"fraction", 0.1}};
    j["mode"] = "meritopt";
    j["eval_every"] = 1;
    if (name == "md-ablation") {
      j["md"] = {{"eta", 0.1}, {"iterations", 5}, {"val_batch_size", 10}};
    }
    if (name == "delta") {
      j["md"] = {{"eta", 0.1}, {"iterations", 100}, {"val_batch_size", 100}};
    }
    return j;
  }
  if (name == "variance-G4") {
    Json sources = Json::array();
    for (int i = 1; i <= 4; ++i) {
      sources.push_back({{"id", "G" + std::to_string(i)},
                         {"kind", "gaussian"},
                         {"role", i == 1 ? "target-train" : "auxiliary"},
                         {"size", 10000},
                         {"target_distribution", true}});
    }
    sources.push_back({{"id", "val"}, {"kind", "gaussian"},
                       {"role", "target-validation"}, {"size", 100}});
    return {{"problem", "mean-estimation"},
            {"dim", 20},
            {"sources", sources},
            {"steps", 1},
            {"verify", {{"trials", 10000}, {"batch_size", 1}, {"tolerance", 0.2}}}};
  }
  if (name == "quadratic") {
    // Full-batch deterministic run; validation data equals the target data.
    return {{"problem", "mean-estimation"},
            {"dim", 20},
            {"sources",
             Json::array({{{"id", "target"}, {"role", "target-train"},
                           {"size", 20}, {"seed", 11}},
                          {{"id", "val"}, {"role", "target-validation"},
                           {"size", 20}, {"seed", 11}}})},
            {"x0", {{"kind", "constant"}, {"value", 1.0}}},
            {"steps", 2000},
            {"step_size", 0.1},
            {"optimizer", "sgd"},
            {"mode", "target-only"},
            {"batch", {{"kind", "fixed"}, {"fraction", 1.0}}},
            {"verify", {{"window", 50}}}};
  }
  if (name == "optimizer") {
    return {{"problem", "mean-estimation"},
            {"dim", 10},
            {"sources", Json::array({{{"id", "target"}, {"role", "target-train"},
                                      {"size", 10}}})},
            {"steps", 1},
            {"optimizer", {{"kind", "adagrad-norm"}, {"b0", 1.0}}},
            {"verify",
             {{"stream", "unit"}, {"optimizer_steps", 10000}, {"optimizer_dim", 10}}}};
  }
  throw ConfigError("--preset", "unknown preset '" + name + "'");
}

DataSource materialize_source(const SourceDecl& d, ModelKind problem,
                              Eigen::Index dim) {
  DataSource src;
  switch (d.kind) {
    case SourceKind::kGaussian:
      if (problem != ModelKind::kMeanEstimation) {
        throw ConfigError("sources." + d.id, "gaussian sources need mean-estimation");
      }
      src = make_gaussian_source(d.id, dim, d.mean, d.size, d.seed, d.noise);
      break;
    case SourceKind::kRegression:
      if (problem != ModelKind::kLinearRegression) {
        throw ConfigError("sources." + d.id,
                          "regression sources need linear-regression");
      }
      src = make_regression_source(d.id, dim, d.mean, d.size, d.seed, d.noise);
      break;
    case SourceKind::kClassification:
      if (problem != ModelKind::kLogisticRegression) {
        throw ConfigError("sources." + d.id,
                          "classification sources need logistic-regression");
      }
      src = make_classification_source(d.id, dim, d.mean, d.size, d.seed);
      break;
    case SourceKind::kFile:
      src = load_file_source(d.id, d.path);
      break;
  }
  src.role = d.role;
  src.target_distribution = d.target_distribution;
  return src;
}

SourceSet materialize_sources(const ExperimentConfig& cfg) {
  const LossModel model(cfg.problem, cfg.dim);
  SourceSet set;
  bool have_validation = false;
  for (const auto& d : cfg.sources) {
    DataSource src = materialize_source(d, cfg.problem, cfg.dim);
    if (src.width() != model.sample_width()) {
      throw ConfigError("sources." + d.id, "sample width " +
                                               std::to_string(src.width()) +
                                               " does not match the problem");
    }
    if (d.role == SourceRole::kTargetValidation) {
      set.validation = std::move(src);
      have_validation = true;
    } else {
      set.train.push_back(std::move(src));
    }
  }
  if (!have_validation) {
    if (cfg.train.mode == TrainMode::kMeritOpt ||
        std::holds_alternative<TwoPhaseConfig>(cfg.train.heuristic) ||
        std::holds_alternative<CycleConfig>(cfg.train.heuristic)) {
      throw ConfigError("sources", "meritopt training needs a target-validation source");
    }
    // Baseline modes evaluate on the first target-train source.
    auto it = std::find_if(set.train.begin(), set.train.end(), [](const auto& s) {
      return s.role == SourceRole::kTargetTrain;
    });
    set.validation = it != set.train.end() ? *it : set.train.front();
    set.validation.role = SourceRole::kTargetValidation;
  }
  return set;
}

Vector materialize_x0(const ExperimentConfig& cfg) {
  switch (cfg.x0.kind) {
    case X0Spec::Kind::kZeros: return Vector::Zero(cfg.dim);
    case X0Spec::Kind::kConstant: return Vector::Constant(cfg.dim, cfg.x0.value);
    case X0Spec::Kind::kValues:
      return Vector::Map(cfg.x0.values.data(),
                         static_cast<Eigen::Index>(cfg.x0.values.size()));
  }
  return Vector::Zero(cfg.dim);
}

}  // namespace meritopt
