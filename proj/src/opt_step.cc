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

#include "meritopt/opt_step.h"

#include <cmath>
#include <stdexcept>

namespace meritopt {
namespace {

void check_step_inputs(const OptimizerState& state, const Vector& x,
                       const Vector& g, double gamma) {
  require_same_dim(x.size(), g.size());
  require_same_dim(x.size(), state.dim());
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("step size must be finite and nonnegative");
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::kSgd: return "sgd";
    case OptimizerKind::kAdam: return "adam";
    case OptimizerKind::kRmsProp: return "rmsprop";
    case OptimizerKind::kAdaGradNorm: return "adagrad-norm";
  }
  return "unknown";
}

OptimizerKind optimizer_kind_from_string(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "rmsprop") return OptimizerKind::kRmsProp;
  if (name == "adagrad-norm") return OptimizerKind::kAdaGradNorm;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void validate(OptimizerKind kind, const OptimizerHyper& hyper) {
  if (kind == OptimizerKind::kAdam &&
      !(hyper.beta1 >= 0.0 && hyper.beta1 < 1.0)) {
    throw std::invalid_argument("beta1 must lie in [0, 1)");
  }
  if ((kind == OptimizerKind::kAdam || kind == OptimizerKind::kRmsProp) &&
      !(hyper.beta2 >= 0.0 && hyper.beta2 < 1.0)) {
    throw std::invalid_argument("beta2 must lie in [0, 1)");
  }
  if ((kind == OptimizerKind::kAdam || kind == OptimizerKind::kRmsProp) &&
      !(hyper.eps > 0.0)) {
    throw std::invalid_argument("eps must be positive");
  }
  if (kind == OptimizerKind::kAdaGradNorm && !(hyper.b0 > 0.0)) {
    throw std::invalid_argument("b0 must be positive");
  }
}

OptimizerState::OptimizerState(OptimizerKind kind, OptimizerHyper hyper,
                               Eigen::Index dim)
    : kind_(kind), hyper_(hyper), dim_(dim) {
  validate(kind, hyper);
  switch (kind) {
    case OptimizerKind::kSgd:
      break;
    case OptimizerKind::kAdam:
      m_ = Vector::Zero(dim);
      v_ = Vector::Zero(dim);
      break;
    case OptimizerKind::kRmsProp:
      rms_sq_ = Vector::Zero(dim);
      break;
    case OptimizerKind::kAdaGradNorm:
      adagrad_sq_ = hyper.b0 * hyper.b0;
      break;
  }
}

Vector OptimizerState::rms_divisor() const {
  return (rms_sq_.array().sqrt() + hyper_.eps).matrix();
}

double OptimizerState::adagrad_b() const { return std::sqrt(adagrad_sq_); }

void OptimizerState::perturb_for_test(double delta) {
  step_count_ += 1;
  if (m_.size() > 0) m_.array() += delta;
  if (v_.size() > 0) v_.array() += delta * delta;
  if (rms_sq_.size() > 0) rms_sq_.array() += delta * delta;
  adagrad_sq_ += delta * delta;
}

bool OptimizerState::operator==(const OptimizerState& other) const {
  auto same = [](const Vector& a, const Vector& b) {
    return a.size() == b.size() && (a.size() == 0 || a == b);
  };
  return kind_ == other.kind_ && step_count_ == other.step_count_ &&
         dim_ == other.dim_ && hyper_.beta1 == other.hyper_.beta1 &&
         hyper_.beta2 == other.hyper_.beta2 && hyper_.eps == other.hyper_.eps &&
         hyper_.b0 == other.hyper_.b0 && same(m_, other.m_) &&
         same(v_, other.v_) && same(rms_sq_, other.rms_sq_) &&
         adagrad_sq_ == other.adagrad_sq_;
}

Vector sgd_step(OptimizerState& state, const Vector& x, const Vector& g,
                double gamma) {
  check_step_inputs(state, x, g, gamma);
  state.step_count_ += 1;
  return x - gamma * g;
}

Vector adam_step(OptimizerState& state, const Vector& x, const Vector& g,
                 double gamma) {
  check_step_inputs(state, x, g, gamma);
  const auto& h = state.hyper_;
  state.step_count_ += 1;
  state.m_ = h.beta1 * state.m_ + (1.0 - h.beta1) * g;
  state.v_ = h.beta2 * state.v_ + (1.0 - h.beta2) * g.cwiseAbs2();
  const double t = static_cast<double>(state.step_count_);
  const double c1 = 1.0 - std::pow(h.beta1, t);
  const double c2 = 1.0 - std::pow(h.beta2, t);
  const Vector m_hat = state.m_ / c1;
  const Vector v_hat = state.v_ / c2;
  return x - gamma * (m_hat.array() / (v_hat.array().sqrt() + h.eps)).matrix();
}

Vector rmsprop_step(OptimizerState& state, const Vector& x, const Vector& g,
                    double gamma) {
  check_step_inputs(state, x, g, gamma);
  const auto& h = state.hyper_;
  state.step_count_ += 1;
  state.rms_sq_ = h.beta2 * state.rms_sq_ + (1.0 - h.beta2) * g.cwiseAbs2();
  const Vector divisor = state.rms_divisor();
  return x - gamma * (g.array() / divisor.array()).matrix();
}

Vector adagrad_norm_step(OptimizerState& state, const Vector& x,
                         const Vector& g, double gamma) {
  check_step_inputs(state, x, g, gamma);
  state.step_count_ += 1;
  state.adagrad_sq_ += g.squaredNorm();
  return x - (gamma / state.adagrad_b()) * g;
}

Vector opt_step(OptimizerState& state, const Vector& x, const Vector& g,
                double gamma) {
  switch (state.kind()) {
    case OptimizerKind::kSgd: return sgd_step(state, x, g, gamma);
    case OptimizerKind::kAdam: return adam_step(state, x, g, gamma);
    case OptimizerKind::kRmsProp: return rmsprop_step(state, x, g, gamma);
    case OptimizerKind::kAdaGradNorm:
      return adagrad_norm_step(state, x, g, gamma);
  }
  throw std::logic_error("unhandled optimizer kind");
}

Vector frozen_step_jacobian(const OptimizerState& state, const Vector& g,
                            double gamma) {
  OptimizerState trial = clone_state(state);
  const Vector x = Vector::Zero(g.size());
  opt_step(trial, x, g, gamma);
  const auto& h = trial.hyper();
  switch (trial.kind()) {
    case OptimizerKind::kSgd:
      return Vector::Constant(g.size(), -gamma);
    case OptimizerKind::kAdam: {
      const double t = static_cast<double>(trial.step_count());
      const double c1 = 1.0 - std::pow(h.beta1, t);
      const double c2 = 1.0 - std::pow(h.beta2, t);
      const double scale = -gamma * (1.0 - h.beta1) / c1;
      const Vector denom =
          ((trial.second_moment() / c2).array().sqrt() + h.eps).matrix();
      return (scale / denom.array()).matrix();
    }
    case OptimizerKind::kRmsProp:
      return (-gamma / trial.rms_divisor().array()).matrix();
    case OptimizerKind::kAdaGradNorm:
      return Vector::Constant(g.size(), -gamma / trial.adagrad_b());
  }
  throw std::logic_error("unhandled optimizer kind");
}

}  // namespace meritopt
