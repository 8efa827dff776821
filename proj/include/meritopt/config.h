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

// Experiment configuration: a JSON document validated against a fixed
// schema. Unknown keys and out-of-range values are rejected with an error
// that names the offending key. Parsing fills in every default, so the
// emitted form of a parsed config is fully resolved and reproducible.

#ifndef MERITOPT_CONFIG_H_
#define MERITOPT_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "meritopt/problems.h"
#include "meritopt/sources.h"
#include "meritopt/trainer.h"

namespace meritopt {

using Json = nlohmann::ordered_json;

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::invalid_argument(key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SourceDecl {
  std::string id;
  SourceKind kind = SourceKind::kGaussian;
  SourceRole role = SourceRole::kAuxiliary;
  Eigen::Index size = 0;
  MeanSpec mean;
  double noise = 1.0;
  std::uint64_t seed = 0;
  std::string path;  // file sources
  bool target_distribution = false;
};

struct X0Spec {
  enum class Kind { kZeros, kConstant, kValues };
  Kind kind = Kind::kZeros;
  double value = 0.0;
  std::vector<double> values;
};

struct VerifyConfig {
  std::int64_t trials = 10000;
  Eigen::Index batch_size = 1;
  double tolerance = 0.2;
  // 0 selects the default for the source count (1e-2 up to 3, 2.5e-2 for 4).
  double grid_step = 0.0;
  int window = 50;
  std::optional<double> sigma_star_sq;
  std::optional<double> delta_hat;
  std::string stream = "unit";
  double bound = 1.0;
  int optimizer_steps = 10000;
  Eigen::Index optimizer_dim = 10;
};

struct ExperimentConfig {
  ModelKind problem = ModelKind::kMeanEstimation;
  Eigen::Index dim = 20;
  std::vector<SourceDecl> sources;
  X0Spec x0;
  TrainConfig train;
  std::string out_dir = "out";
  std::vector<std::string> formats = {"csv", "jsonl"};
  VerifyConfig verify;
};

ExperimentConfig parse_config(const Json& doc);
// One entry of "sources"; an omitted seed is derived from `experiment_seed`.
SourceDecl parse_source_decl(const Json& doc, std::uint64_t experiment_seed);
ExperimentConfig parse_config_file(const std::filesystem::path& path);
// Fully resolved JSON form; parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& cfg);

// Built-in configurations: "appendixB", "md-ablation" (base of the ablation
// grid), "variance-G4", "quadratic", "delta", "optimizer".
Json preset_json(const std::string& name);
std::vector<std::string> preset_names();

// Materialized sources of an experiment.
struct SourceSet {
  std::vector<DataSource> train;
  DataSource validation;
};

DataSource materialize_source(const SourceDecl& decl, ModelKind problem,
                              Eigen::Index dim);
SourceSet materialize_sources(const ExperimentConfig& cfg);
Vector materialize_x0(const ExperimentConfig& cfg);

}  // namespace meritopt

#endif  // MERITOPT_CONFIG_H_
