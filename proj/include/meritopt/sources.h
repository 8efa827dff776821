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

// Heterogeneous data sources, minibatch sampling, the adaptive batch
// allocator and the active-source registry.

#ifndef MERITOPT_SOURCES_H_
#define MERITOPT_SOURCES_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "meritopt/simplex.h"
#include "meritopt/types.h"

namespace meritopt {

using Rng = std::mt19937_64;

// Independent, reproducible RNG stream keyed by (seed, id, step). Streams for
// different ids or steps do not depend on consumption order.
Rng make_stream(std::uint64_t seed, std::string_view id, std::uint64_t step);

// Stable 64-bit hash (FNV-1a) of a string; independent of the standard
// library implementation.
std::uint64_t stable_hash(std::string_view s);

enum class SourceKind { kGaussian, kRegression, kClassification, kFile };
enum class SourceRole { kTargetTrain, kAuxiliary, kTargetValidation };

std::string_view to_string(SourceKind kind);
std::string_view to_string(SourceRole role);
SourceKind source_kind_from_string(std::string_view name);
SourceRole source_role_from_string(std::string_view name);

// How a location vector (Gaussian mean, regression coefficients) is built.
struct MeanSpec {
  enum class Kind { kZero, kScaledOnes, kRandomUnit };
  Kind kind = Kind::kZero;
  double mu = 0.0;          // kScaledOnes: every entry equals mu
  std::uint64_t seed = 0;   // kRandomUnit

  static MeanSpec zero() { return {}; }
  static MeanSpec scaled_ones(double mu) { return {Kind::kScaledOnes, mu, 0}; }
  static MeanSpec random_unit(std::uint64_t seed) {
    return {Kind::kRandomUnit, 0.0, seed};
  }
};

std::string_view to_string(MeanSpec::Kind kind);
MeanSpec::Kind mean_kind_from_string(std::string_view name);

// Materializes the location vector. random-unit specs have unit norm.
Vector make_location(Eigen::Index dim, const MeanSpec& spec);

struct SourceParams {
  // Gaussian: the mean. Regression / classification: true coefficients.
  Vector location;
  // Gaussian: per-coordinate standard deviation. Regression: label noise.
  double noise = 1.0;
};

// A finite dataset. Samples are materialized once and never change.
struct DataSource {
  std::string id;
  SourceKind kind = SourceKind::kGaussian;
  SourceRole role = SourceRole::kAuxiliary;
  SourceParams params;
  // Marks membership in the target-distribution index set used by the
  // variance-bound check.
  bool target_distribution = false;
  SampleSet samples;

  Eigen::Index size() const { return samples.rows(); }
  Eigen::Index width() const { return samples.cols(); }
};

// D ~ N(location, noise^2 I) with `size` samples of dimension `dim`.
DataSource make_gaussian_source(std::string id, Eigen::Index dim,
                                const MeanSpec& mean_spec, Eigen::Index size,
                                std::uint64_t seed, double noise = 1.0);

// Rows are (a, y) with a ~ N(0, I_dim), y = <a, coef> + noise * N(0, 1).
DataSource make_regression_source(std::string id, Eigen::Index dim,
                                  const MeanSpec& coef_spec, Eigen::Index size,
                                  std::uint64_t seed, double noise);

// Rows are (a, y) with a ~ N(0, I_dim), y ~ Bernoulli(sigmoid(<a, coef>)).
DataSource make_classification_source(std::string id, Eigen::Index dim,
                                      const MeanSpec& coef_spec,
                                      Eigen::Index size, std::uint64_t seed);

// File format: first line "dim=<d>", then one sample per line as d
// comma-separated decimal numbers.
void write_source_file(const std::filesystem::path& path,
                       const SampleSet& samples);
SampleSet read_source_file(const std::filesystem::path& path);
DataSource load_file_source(std::string id, const std::filesystem::path& path);

// Uniform draw of `batch_size` distinct rows.
SampleSet sample_minibatch(const DataSource& source, Eigen::Index batch_size,
                           Rng& rng);

// Per-source batch sizes, in source order.
struct BatchPlan {
  std::vector<Eigen::Index> per_source;
  Eigen::Index total = 0;
};

// Splits `total` proportionally to `sizes`, clamped to
// [min_bound, min(max_bound, size_i)], with the residual redistributed
// proportionally among unclamped sources and integer rounding by largest
// remainder (ties go to the lower index).
BatchPlan allocate_adaptive_batches(const std::vector<Eigen::Index>& sizes,
                                    Eigen::Index total, Eigen::Index min_bound,
                                    Eigen::Index max_bound);

// Which training sources are still in play, plus the current weights over
// them.
class SourceRegistry {
 public:
  struct Entry {
    std::string id;
    SourceRole role;
  };

  explicit SourceRegistry(std::vector<Entry> entries,
                          bool allow_target_drop = false);

  std::size_t total_count() const { return entries_.size(); }
  std::size_t active_count() const { return active_.size(); }
  const std::vector<std::size_t>& active_indices() const { return active_; }
  const Entry& entry(std::size_t index) const { return entries_.at(index); }
  bool is_active(std::size_t index) const;
  bool is_protected(std::size_t index) const;
  bool allow_target_drop() const { return allow_target_drop_; }

  // Position of `id` among all entries; throws if unknown.
  std::size_t index_of(std::string_view id) const;

  // Weights over the active set, in active order.
  const WeightVector& weights() const { return weights_; }
  void set_weights(WeightVector w);

  // Expands the active-set weights to all entries, zeros for dropped ones.
  Vector full_weights() const;

 private:
  friend SourceRegistry drop_source(const SourceRegistry&, std::string_view);

  std::vector<Entry> entries_;
  std::vector<std::size_t> active_;
  WeightVector weights_;
  bool allow_target_drop_ = false;
};

// Removes `source_id` from the active set and renormalizes the remaining
// weights. Dropping a target source requires allow_target_drop; dropping the
// last active source is an error.
SourceRegistry drop_source(const SourceRegistry& registry,
                           std::string_view source_id);

}  // namespace meritopt

#endif  // MERITOPT_SOURCES_H_
