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

#include "meritopt/problems.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace meritopt {
namespace {

// log(1 + e^z) without overflow.
double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kMeanEstimation: return "mean-estimation";
    case ModelKind::kLinearRegression: return "linear-regression";
    case ModelKind::kLogisticRegression: return "logistic-regression";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "mean-estimation") return ModelKind::kMeanEstimation;
  if (name == "linear-regression") return ModelKind::kLinearRegression;
  if (name == "logistic-regression") return ModelKind::kLogisticRegression;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

LossModel::LossModel(ModelKind kind, Eigen::Index dim) : kind_(kind), dim_(dim) {
  if (dim < 1) throw std::invalid_argument("model dimension must be >= 1");
}

Eigen::Index LossModel::sample_width() const {
  return kind_ == ModelKind::kMeanEstimation ? dim_ : dim_ + 1;
}

void LossModel::check(const SampleSet& batch, const Vector& x) const {
  if (batch.rows() == 0) throw std::invalid_argument("empty batch");
  require_same_dim(x.size(), dim_);
  require_same_dim(batch.cols(), sample_width());
}

double LossModel::loss(const SampleSet& batch, const Vector& x) const {
  check(batch, x);
  const double m = static_cast<double>(batch.rows());
  switch (kind_) {
    case ModelKind::kMeanEstimation:
      return (batch.rowwise() - x.transpose()).rowwise().squaredNorm().sum() / m;
    case ModelKind::kLinearRegression: {
      const Vector r = batch.leftCols(dim_) * x - batch.col(dim_);
      return 0.5 * r.squaredNorm() / m;
    }
    case ModelKind::kLogisticRegression: {
      const Vector z = batch.leftCols(dim_) * x;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        acc += softplus(z[i]) - batch(i, dim_) * z[i];
      }
      return acc / m;
    }
  }
  throw std::logic_error("unhandled model kind");
}

Vector LossModel::gradient(const SampleSet& batch, const Vector& x) const {
  check(batch, x);
  const double m = static_cast<double>(batch.rows());
  switch (kind_) {
    case ModelKind::kMeanEstimation:
      return 2.0 * (x - batch.colwise().mean().transpose());
    case ModelKind::kLinearRegression: {
      const Vector r = batch.leftCols(dim_) * x - batch.col(dim_);
      return batch.leftCols(dim_).transpose() * r / m;
    }
    case ModelKind::kLogisticRegression: {
      Vector z = batch.leftCols(dim_) * x;
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        z[i] = sigmoid(z[i]) - batch(i, dim_);
      }
      return batch.leftCols(dim_).transpose() * z / m;
    }
  }
  throw std::logic_error("unhandled model kind");
}

Optimum LossModel::closed_form_optimum(const DataSource& source) const {
  if (source.kind == SourceKind::kFile || source.params.location.size() == 0) {
    throw std::invalid_argument("no closed-form optimum for source '" +
                                source.id + "'");
  }
  require_same_dim(source.params.location.size(), dim_);
  const double s = source.params.noise;
  if (kind_ == ModelKind::kMeanEstimation &&
      source.kind == SourceKind::kGaussian) {
    return {source.params.location, static_cast<double>(dim_) * s * s};
  }
  if (kind_ == ModelKind::kLinearRegression &&
      source.kind == SourceKind::kRegression) {
    return {source.params.location, 0.5 * s * s};
  }
  throw std::invalid_argument(std::string("no closed-form optimum for ") +
                              std::string(to_string(kind_)) + " on a " +
                              std::string(to_string(source.kind)) + " source");
}

}  // namespace meritopt
