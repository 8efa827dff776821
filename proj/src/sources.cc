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

#include "meritopt/sources.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace meritopt {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

SampleSet gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  SampleSet m(rows, cols);
  // Row-major fill so a prefix of rows does not depend on `rows`.
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = normal(rng);
  }
  return m;
}

void check_shape(Eigen::Index dim, Eigen::Index size) {
  if (dim < 1) throw std::invalid_argument("source dimension must be >= 1");
  if (size < 1) throw std::invalid_argument("source size must be >= 1");
}

}  // namespace

std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng make_stream(std::uint64_t seed, std::string_view id, std::uint64_t step) {
  const std::uint64_t a = splitmix64(seed);
  const std::uint64_t b = splitmix64(a ^ stable_hash(id));
  const std::uint64_t c = splitmix64(b ^ splitmix64(step + 0x632be59bd9b4e019ULL));
  std::seed_seq seq{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

std::string_view to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kGaussian: return "gaussian";
    case SourceKind::kRegression: return "regression";
    case SourceKind::kClassification: return "classification";
    case SourceKind::kFile: return "file";
  }
  return "unknown";
}

std::string_view to_string(SourceRole role) {
  switch (role) {
    case SourceRole::kTargetTrain: return "target-train";
    case SourceRole::kAuxiliary: return "auxiliary";
    case SourceRole::kTargetValidation: return "target-validation";
  }
  return "unknown";
}

SourceKind source_kind_from_string(std::string_view name) {
  if (name == "gaussian") return SourceKind::kGaussian;
  if (name == "regression") return SourceKind::kRegression;
  if (name == "classification") return SourceKind::kClassification;
  if (name == "file") return SourceKind::kFile;
  throw std::invalid_argument("unknown source kind '" + std::string(name) + "'");
}

SourceRole source_role_from_string(std::string_view name) {
  if (name == "target-train") return SourceRole::kTargetTrain;
  if (name == "auxiliary") return SourceRole::kAuxiliary;
  if (name == "target-validation") return SourceRole::kTargetValidation;
  throw std::invalid_argument("unknown source role '" + std::string(name) + "'");
}

std::string_view to_string(MeanSpec::Kind kind) {
  switch (kind) {
    case MeanSpec::Kind::kZero: return "zero";
    case MeanSpec::Kind::kScaledOnes: return "scaled-ones";
    case MeanSpec::Kind::kRandomUnit: return "random-unit";
  }
  return "unknown";
}

MeanSpec::Kind mean_kind_from_string(std::string_view name) {
  if (name == "zero") return MeanSpec::Kind::kZero;
  if (name == "scaled-ones") return MeanSpec::Kind::kScaledOnes;
  if (name == "random-unit") return MeanSpec::Kind::kRandomUnit;
  throw std::invalid_argument("unknown mean spec '" + std::string(name) + "'");
}

Vector make_location(Eigen::Index dim, const MeanSpec& spec) {
  if (dim < 1) throw std::invalid_argument("source dimension must be >= 1");
  switch (spec.kind) {
    case MeanSpec::Kind::kZero:
      return Vector::Zero(dim);
    case MeanSpec::Kind::kScaledOnes:
      if (!std::isfinite(spec.mu)) {
        throw std::invalid_argument("mean scale mu must be finite");
      }
      return Vector::Constant(dim, spec.mu);
    case MeanSpec::Kind::kRandomUnit: {
      Rng rng = make_stream(spec.seed, "random-unit", 0);
      std::normal_distribution<double> normal(0.0, 1.0);
      Vector e(dim);
      do {
        for (Eigen::Index i = 0; i < dim; ++i) e[i] = normal(rng);
      } while (e.norm() == 0.0);
      return e / e.norm();
    }
  }
  throw std::logic_error("unhandled mean spec");
}

DataSource make_gaussian_source(std::string id, Eigen::Index dim,
                                const MeanSpec& mean_spec, Eigen::Index size,
                                std::uint64_t seed, double noise) {
  check_shape(dim, size);
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw std::invalid_argument("noise scale must be finite and nonnegative");
  }
  DataSource src;
  src.id = std::move(id);
  src.kind = SourceKind::kGaussian;
  src.params.location = make_location(dim, mean_spec);
  src.params.noise = noise;
  Rng rng = make_stream(seed, "gaussian-samples", 0);
  src.samples = noise * gaussian_matrix(size, dim, rng);
  src.samples.rowwise() += src.params.location.transpose();
  return src;
}

DataSource make_regression_source(std::string id, Eigen::Index dim,
                                  const MeanSpec& coef_spec, Eigen::Index size,
                                  std::uint64_t seed, double noise) {
  check_shape(dim, size);
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw std::invalid_argument("noise scale must be finite and nonnegative");
  }
  DataSource src;
  src.id = std::move(id);
  src.kind = SourceKind::kRegression;
  src.params.location = make_location(dim, coef_spec);
  src.params.noise = noise;
  Rng rng = make_stream(seed, "regression-samples", 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  src.samples.resize(size, dim + 1);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) src.samples(r, c) = normal(rng);
    const double clean =
        src.samples.row(r).head(dim).dot(src.params.location.transpose());
    src.samples(r, dim) = clean + noise * normal(rng);
  }
  return src;
}

DataSource make_classification_source(std::string id, Eigen::Index dim,
                                      const MeanSpec& coef_spec,
                                      Eigen::Index size, std::uint64_t seed) {
  check_shape(dim, size);
  DataSource src;
  src.id = std::move(id);
  src.kind = SourceKind::kClassification;
  src.params.location = make_location(dim, coef_spec);
  src.params.noise = 0.0;
  Rng rng = make_stream(seed, "classification-samples", 0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  src.samples.resize(size, dim + 1);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) src.samples(r, c) = normal(rng);
    const double z =
        src.samples.row(r).head(dim).dot(src.params.location.transpose());
    const double p = 1.0 / (1.0 + std::exp(-z));
    src.samples(r, dim) = unif(rng) < p ? 1.0 : 0.0;
  }
  return src;
}

void write_source_file(const std::filesystem::path& path,
                       const SampleSet& samples) {
  std::ostringstream out;
  out << "dim=" << samples.cols() << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (Eigen::Index c = 0; c < samples.cols(); ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", samples(r, c));
      if (c > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << out.str();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

SampleSet read_source_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open source file " + path.string());
  std::string line;
  if (!std::getline(f, line) || line.rfind("dim=", 0) != 0) {
    throw std::runtime_error(path.string() + ": missing 'dim=<d>' header");
  }
  Eigen::Index dim = 0;
  try {
    dim = std::stoll(line.substr(4));
  } catch (const std::exception&) {
    throw std::runtime_error(path.string() + ": bad header '" + line + "'");
  }
  if (dim < 1) throw std::runtime_error(path.string() + ": dim must be >= 1");

  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t count = 0;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(field, &used));
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                 ": bad number '" + field + "'");
      }
      ++count;
    }
    if (count != static_cast<std::size_t>(dim)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected " + std::to_string(dim) + " values");
    }
    ++rows;
  }
  if (rows == 0) throw std::runtime_error(path.string() + ": no samples");
  SampleSet samples(static_cast<Eigen::Index>(rows), dim);
  for (std::size_t r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      samples(static_cast<Eigen::Index>(r), c) =
          values[r * static_cast<std::size_t>(dim) + static_cast<std::size_t>(c)];
    }
  }
  return samples;
}

DataSource load_file_source(std::string id, const std::filesystem::path& path) {
  DataSource src;
  src.id = std::move(id);
  src.kind = SourceKind::kFile;
  src.samples = read_source_file(path);
  return src;
}

SampleSet sample_minibatch(const DataSource& source, Eigen::Index batch_size,
                           Rng& rng) {
  const Eigen::Index size = source.size();
  if (batch_size < 1 || batch_size > size) {
    throw std::invalid_argument("batch size " + std::to_string(batch_size) +
                                " outside [1, " + std::to_string(size) +
                                "] for source '" + source.id + "'");
  }
  // Partial Fisher-Yates over row indices.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(size));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  SampleSet batch(batch_size, source.width());
  for (Eigen::Index k = 0; k < batch_size; ++k) {
    std::uniform_int_distribution<Eigen::Index> pick(k, size - 1);
    std::swap(idx[static_cast<std::size_t>(k)],
              idx[static_cast<std::size_t>(pick(rng))]);
    batch.row(k) = source.samples.row(idx[static_cast<std::size_t>(k)]);
  }
  return batch;
}

BatchPlan allocate_adaptive_batches(const std::vector<Eigen::Index>& sizes,
                                    Eigen::Index total, Eigen::Index min_bound,
                                    Eigen::Index max_bound) {
  const std::size_t n = sizes.size();
  if (n == 0) throw std::invalid_argument("no sources to allocate");
  if (min_bound < 1 || min_bound > max_bound) {
    throw std::invalid_argument("infeasible batch plan: bad bounds");
  }
  if (static_cast<Eigen::Index>(n) * min_bound > total) {
    throw std::invalid_argument("infeasible batch plan");
  }
  std::vector<double> lo(n), hi(n), s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sizes[i] < 1) throw std::invalid_argument("source size must be >= 1");
    s[i] = static_cast<double>(sizes[i]);
    hi[i] = static_cast<double>(std::min(max_bound, sizes[i]));
    lo[i] = std::min(static_cast<double>(min_bound), hi[i]);
  }

  // Continuous allocation a_i(lambda) = clamp(lambda * s_i, lo_i, hi_i) with
  // sum a_i = total. The sum is piecewise linear and nondecreasing in
  // lambda; walk its breakpoints.
  auto alloc_sum = [&](double lambda) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += std::clamp(lambda * s[i], lo[i], hi[i]);
    }
    return acc;
  };
  std::vector<double> breaks;
  breaks.reserve(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    breaks.push_back(lo[i] / s[i]);
    breaks.push_back(hi[i] / s[i]);
  }
  std::sort(breaks.begin(), breaks.end());

  const double target = static_cast<double>(total);
  std::vector<double> cont(n);
  if (alloc_sum(breaks.back()) <= target) {
    for (std::size_t i = 0; i < n; ++i) cont[i] = hi[i];
  } else {
    double lambda = breaks.front();
    for (std::size_t k = 1; k < breaks.size(); ++k) {
      if (alloc_sum(breaks[k]) >= target) {
        // Linear on [breaks[k-1], breaks[k]]: solve for lambda exactly.
        const double left = breaks[k - 1];
        double fixed = 0.0, slope = 0.0;
        const double mid = 0.5 * (left + breaks[k]);
        for (std::size_t i = 0; i < n; ++i) {
          const double v = mid * s[i];
          if (v <= lo[i]) {
            fixed += lo[i];
          } else if (v >= hi[i]) {
            fixed += hi[i];
          } else {
            slope += s[i];
          }
        }
        lambda = slope > 0.0 ? (target - fixed) / slope : left;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      cont[i] = std::clamp(lambda * s[i], lo[i], hi[i]);
    }
  }

  // Largest-remainder rounding toward the (integer) sum of the continuous
  // allocation.
  BatchPlan plan;
  plan.per_source.resize(n);
  double cont_total = 0.0;
  for (double v : cont) cont_total += v;
  const auto want = static_cast<Eigen::Index>(std::llround(cont_total));
  Eigen::Index assigned = 0;
  std::vector<std::pair<double, std::size_t>> rema;
  for (std::size_t i = 0; i < n; ++i) {
    const double fl = std::floor(cont[i] + 1e-9);
    plan.per_source[i] = static_cast<Eigen::Index>(fl);
    assigned += plan.per_source[i];
    rema.emplace_back(cont[i] - fl, i);
  }
  std::stable_sort(rema.begin(), rema.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  for (std::size_t k = 0; assigned < want && k < rema.size(); ++k) {
    const std::size_t i = rema[k].second;
    if (static_cast<double>(plan.per_source[i]) + 1.0 <= hi[i]) {
      ++plan.per_source[i];
      ++assigned;
    }
  }
  plan.total = assigned;
  return plan;
}

SourceRegistry::SourceRegistry(std::vector<Entry> entries,
                               bool allow_target_drop)
    : entries_(std::move(entries)), allow_target_drop_(allow_target_drop) {
  if (entries_.empty()) throw std::invalid_argument("registry needs a source");
  active_.resize(entries_.size());
  std::iota(active_.begin(), active_.end(), std::size_t{0});
  weights_ = WeightVector::uniform(entries_.size());
}

bool SourceRegistry::is_active(std::size_t index) const {
  return std::find(active_.begin(), active_.end(), index) != active_.end();
}

bool SourceRegistry::is_protected(std::size_t index) const {
  const SourceRole role = entries_.at(index).role;
  return !allow_target_drop_ && role != SourceRole::kAuxiliary;
}

std::size_t SourceRegistry::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id == id) return i;
  }
  throw std::invalid_argument("unknown source '" + std::string(id) + "'");
}

void SourceRegistry::set_weights(WeightVector w) {
  if (w.size() != active_.size()) {
    throw std::invalid_argument("weight vector length != active source count");
  }
  weights_ = std::move(w);
}

Vector SourceRegistry::full_weights() const {
  Vector full = Vector::Zero(static_cast<Eigen::Index>(entries_.size()));
  for (std::size_t k = 0; k < active_.size(); ++k) {
    full[static_cast<Eigen::Index>(active_[k])] = weights_[k];
  }
  return full;
}

SourceRegistry drop_source(const SourceRegistry& registry,
                           std::string_view source_id) {
  const std::size_t index = registry.index_of(source_id);
  const auto& active = registry.active_;
  const auto pos = std::find(active.begin(), active.end(), index);
  if (pos == active.end()) {
    throw std::invalid_argument("source '" + std::string(source_id) +
                                "' is not active");
  }
  if (registry.is_protected(index)) {
    throw std::invalid_argument("source '" + std::string(source_id) +
                                "' is a target source and cannot be dropped");
  }
  if (active.size() == 1) {
    throw std::invalid_argument("cannot drop the last active source");
  }
  const auto k = static_cast<std::size_t>(pos - active.begin());

  SourceRegistry out = registry;
  out.active_.erase(out.active_.begin() + static_cast<std::ptrdiff_t>(k));
  const Vector& w = registry.weights_.values();
  Vector rest(static_cast<Eigen::Index>(out.active_.size()));
  for (std::size_t j = 0, r = 0; j < active.size(); ++j) {
    if (j != k) rest[static_cast<Eigen::Index>(r++)] = w[static_cast<Eigen::Index>(j)];
  }
  out.weights_ = rest.sum() > 0.0 ? WeightVector::normalized(rest)
                                  : WeightVector::uniform(out.active_.size());
  return out;
}

}  // namespace meritopt
