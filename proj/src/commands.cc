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

#include "meritopt/commands.h"

#include <cstdio>
#include <algorithm>
#include <exception>
#include <fstream>
#include <filesystem>
#include <sstream>

#include "meritopt/export.h"

namespace meritopt {
namespace {

namespace fs = std::filesystem;

std::string ablation_name(double eta, int iterations) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "eta_%g_iters_%d", eta, iterations);
  return buf;
}

OptimizerCheckOptions::Stream stream_from_string(const std::string& s) {
  if (s == "unit") return OptimizerCheckOptions::Stream::kUnitNorm;
  if (s == "zero") return OptimizerCheckOptions::Stream::kZero;
  return OptimizerCheckOptions::Stream::kBounded;
}

double default_grid_step(std::size_t n) { return n <= 3 ? 1e-2 : 2.5e-2; }

std::string report_path(const ExperimentConfig& cfg, const std::string& check) {
  return (fs::path(cfg.out_dir) / ("report_" + check + ".csv")).string();
}

}  // namespace

Json load_config_json(const CommandOptions& opts) {
  if (opts.config_path && opts.preset) {
    throw ConfigError("--config", "use either --config or --preset");
  }
  Json doc;
  if (opts.preset) {
    doc = preset_json(*opts.preset);
  } else if (opts.config_path) {
    std::ifstream f(*opts.config_path);
    if (!f) throw ConfigError("--config", "cannot open " + *opts.config_path);
    try {
      doc = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
  } else {
    throw ConfigError("--config", "one of --config or --preset is required");
  }
  if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
  if (opts.seed) doc["seed"] = *opts.seed;
  if (opts.out_dir) {
    if (!doc.contains("output") || !doc["output"].is_object()) {
      doc["output"] = Json::object();
    }
    doc["output"]["dir"] = *opts.out_dir;
  }
  return doc;
}

std::vector<std::pair<std::string, Json>> ablation_grid(const Json& base) {
  std::vector<std::pair<std::string, Json>> out;
  const std::string dir =
      base.contains("output") && base["output"].contains("dir")
          ? base["output"]["dir"].get<std::string>()
          : std::string("out");
  for (double eta : {0.1, 0.01}) {
    for (int iterations : {5, 100}) {
      Json j = base;
      if (!j.contains("md") || !j["md"].is_object()) j["md"] = Json::object();
      j["md"]["eta"] = eta;
      j["md"]["iterations"] = iterations;
      const std::string name = ablation_name(eta, iterations);
      if (!j.contains("output") || !j["output"].is_object()) {
        j["output"] = Json::object();
      }
      j["output"]["dir"] = (fs::path(dir) / name).string();
      out.emplace_back(name, std::move(j));
    }
  }
  return out;
}

RunOutput run_experiment(const ExperimentConfig& cfg, const std::string& dir) {
  const SourceSet sources = materialize_sources(cfg);
  const LossModel model(cfg.problem, cfg.dim);
  RunOutput out;
  out.result = run(cfg.train, sources.train, sources.validation, model);
  const auto rows = export_rows(out.result);
  out.csv = to_csv(rows);

  const fs::path root(dir);
  fs::create_directories(root);
  write_file_atomic(root / "resolved_config.json", to_json(cfg).dump(2) + "\n");
  for (const auto& f : cfg.formats) {
    if (f == "csv") write_file_atomic(root / "trajectory.csv", out.csv);
    if (f == "jsonl") write_file_atomic(root / "trajectory.jsonl", to_jsonl(rows));
  }
  write_file_atomic(root / "final_x.txt", format_vector(out.result.final_x));
  return out;
}

PhiSnapshot initial_snapshot(const ExperimentConfig& cfg, const SourceSet& sources,
                             const LossModel& model) {
  const TrainConfig& t = cfg.train;
  std::vector<std::size_t> all(sources.train.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto sizes = batch_sizes(t.batch, sources.train, all);

  PhiSnapshot snap{t.x0.size() ? t.x0 : Vector::Zero(cfg.dim),
                   {},
                   t.step_size.at(0, t.steps),
                   OptimizerState(t.optimizer, t.hyper, cfg.dim),
                   {},
                   {}};
  for (std::size_t i = 0; i < sources.train.size(); ++i) {
    const DataSource& src = sources.train[i];
    Rng rng = batch_stream(t.seed, src.id, 0);
    snap.grads.push_back(model.gradient(sample_minibatch(src, sizes[i], rng), snap.x));
    if (src.target_distribution) snap.ideal_support.push_back(i);
  }
  Rng rng = validation_stream(t.seed, 0);
  snap.val_batch = sample_minibatch(sources.validation, t.md.val_batch_size, rng);
  return snap;
}

VerificationReport run_check(const std::string& check, const ExperimentConfig& cfg) {
  const VerifyConfig& v = cfg.verify;
  const LossModel model(cfg.problem, cfg.dim);
  if (check == "optimizer") {
    OptimizerCheckOptions o;
    o.stream = stream_from_string(v.stream);
    o.steps = v.optimizer_steps;
    o.dim = v.optimizer_dim;
    o.bound = v.bound;
    o.gamma = cfg.train.step_size.gamma_max;
    o.seed = cfg.train.seed;
    o.emit_series = true;
    return check_optimizer_invariants(cfg.train.optimizer, cfg.train.hyper, o);
  }
  const SourceSet sources = materialize_sources(cfg);
  if (check == "variance") {
    std::vector<DataSource> group;
    for (const auto& s : sources.train) {
      if (s.target_distribution) group.push_back(s);
    }
    VarianceCheckOptions o;
    o.trials = v.trials;
    o.batch_size = v.batch_size;
    o.tolerance = v.tolerance;
    o.seed = cfg.train.seed;
    return check_variance_bound(group, model, cfg.train.x0, o);
  }
  if (check == "delta") {
    const PhiSnapshot snap = initial_snapshot(cfg, sources, model);
    const double step = v.grid_step > 0.0 ? v.grid_step
                                          : default_grid_step(snap.grads.size());
    return estimate_delta(snap, model, cfg.train.md, step);
  }
  if (check == "neighborhood") {
    const TrainResult result =
        run(cfg.train, sources.train, sources.validation, model);
    NeighborhoodOptions o;
    o.window = v.window;
    o.sigma_star_sq = v.sigma_star_sq;
    o.delta_hat = v.delta_hat;
    o.gamma = cfg.train.step_size.gamma_max;
    return check_neighborhood_convergence(result.records, o);
  }
  throw ConfigError("--check", "unknown check '" + check + "'");
}

std::string format_report(const VerificationReport& r) {
  std::ostringstream out;
  out << "check=" << r.check << '\n';
  out << "pass=" << (r.pass ? "true" : "false") << '\n';
  out << "trials=" << r.trials << '\n';
  if (r.bound) out << "bound=" << format_double(*r.bound) << '\n';
  if (r.measured) out << "measured=" << format_double(*r.measured) << '\n';
  out << "tolerance=" << format_double(r.tolerance) << '\n';
  for (const auto& [name, value] : r.quantities) {
    out << name << '=' << format_double(value) << '\n';
  }
  for (const auto& [name, values] : r.series) {
    out << "series." << name << ".length=" << values.size() << '\n';
  }
  for (const auto& note : r.notes) out << "note=" << note << '\n';
  return out.str();
}

std::string report_csv(const VerificationReport& r) {
  std::ostringstream out;
  out << "name,index,value\n";
  out << "pass,," << (r.pass ? 1 : 0) << '\n';
  out << "trials,," << r.trials << '\n';
  if (r.bound) out << "bound,," << format_double(*r.bound) << '\n';
  if (r.measured) out << "measured,," << format_double(*r.measured) << '\n';
  out << "tolerance,," << format_double(r.tolerance) << '\n';
  for (const auto& [name, value] : r.quantities) {
    out << name << ",," << format_double(value) << '\n';
  }
  for (const auto& [name, values] : r.series) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      out << name << ',' << i << ',' << format_double(values[i]) << '\n';
    }
  }
  return out.str();
}

int cmd_run(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const Json doc = load_config_json(opts);
    std::vector<std::pair<std::string, Json>> jobs;
    if (opts.preset && *opts.preset == "md-ablation") {
      jobs = ablation_grid(doc);
    } else {
      jobs.emplace_back("", doc);
    }
    for (const auto& [name, job] : jobs) {
      const ExperimentConfig cfg = parse_config(job);
      const RunOutput r = run_experiment(cfg, cfg.out_dir);
      const TrajectoryRecord* last =
          r.result.records.empty() ? nullptr : &r.result.records.back();
      out << "run=" << (name.empty() ? "main" : name) << " dir=" << cfg.out_dir
          << " steps=" << cfg.train.steps;
      if (last) {
        out << " val_loss=" << format_double(last->val_loss);
        for (std::size_t i = 0; i < r.result.source_ids.size(); ++i) {
          out << " w[" << r.result.source_ids[i]
              << "]=" << format_double(last->weights[static_cast<Eigen::Index>(i)]);
        }
      }
      out << '\n';
    }
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_verify(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  static const char* kChecks[] = {"variance", "delta", "neighborhood", "optimizer"};
  if (std::find(std::begin(kChecks), std::end(kChecks), opts.check) ==
      std::end(kChecks)) {
    err << "error: --check must be one of variance, delta, neighborhood, optimizer\n";
    return kExitUsage;
  }
  try {
    const ExperimentConfig cfg = parse_config(load_config_json(opts));
    const VerificationReport report = run_check(opts.check, cfg);
    out << format_report(report);
    write_file_atomic(report_path(cfg, opts.check), report_csv(report));
    return report.pass ? kExitOk : kExitFailure;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_generate(const CommandOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    if (!opts.config_path) throw ConfigError("--config", "required");
    if (!opts.out_dir) throw ConfigError("--out", "required");
    std::ifstream f(*opts.config_path);
    if (!f) throw ConfigError("--config", "cannot open " + *opts.config_path);
    Json doc;
    try {
      doc = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw ConfigError("--config", std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("<root>", "expected an object");
    Eigen::Index dim = 20;
    if (doc.contains("dim")) {
      if (!doc["dim"].is_number_integer() || doc["dim"].get<std::int64_t>() < 1) {
        throw ConfigError("dim", "expected a positive integer");
      }
      dim = doc["dim"].get<Eigen::Index>();
      doc.erase("dim");
    }
    if (!doc.contains("id")) doc["id"] = "generated";
    if (opts.seed) doc["seed"] = *opts.seed;
    const SourceDecl decl = parse_source_decl(doc, 0);
    ModelKind problem = ModelKind::kMeanEstimation;
    switch (decl.kind) {
      case SourceKind::kGaussian: problem = ModelKind::kMeanEstimation; break;
      case SourceKind::kRegression: problem = ModelKind::kLinearRegression; break;
      case SourceKind::kClassification:
        problem = ModelKind::kLogisticRegression;
        break;
      case SourceKind::kFile:
        throw ConfigError("source.kind", "cannot generate a file source");
    }
    const DataSource src = materialize_source(decl, problem, dim);
    const fs::path path(*opts.out_dir);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_source_file(path, src.samples);
    out << "wrote " << src.size() << " samples of width " << src.width() << " to "
        << path.string() << '\n';
    return kExitOk;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace meritopt
