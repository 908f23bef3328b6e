// Copyright (c) 2026 The usbl_homing Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "homing/graph.hpp"

#include <stdexcept>
#include <utility>

namespace homing {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

int kind_rank(VariableKind k) {
  switch (k) {
    case VariableKind::ChaserState: return 0;
    case VariableKind::ImuBias: return 1;
    case VariableKind::TargetPosition: return 2;
    case VariableKind::TargetSpeed: return 3;
    case VariableKind::TargetHeading: return 4;
  }
  return 5;
}

bool is_shared(VariableKind k) {
  return k == VariableKind::TargetSpeed || k == VariableKind::TargetHeading;
}

}  // namespace

std::string to_string(const VariableKey& key) {
  const char* name = "?";
  switch (key.kind) {
    case VariableKind::ChaserState: name = "C"; break;
    case VariableKind::TargetPosition: name = "T"; break;
    case VariableKind::TargetSpeed: name = "v"; break;
    case VariableKind::TargetHeading: name = "theta"; break;
    case VariableKind::ImuBias: name = "B"; break;
  }
  return std::string(name) + std::to_string(key.index);
}

bool elimination_less(const VariableKey& a, const VariableKey& b) {
  const bool sa = is_shared(a.kind);
  const bool sb = is_shared(b.kind);
  if (sa != sb) return sb;
  if (a.index != b.index) return a.index < b.index;
  return kind_rank(a.kind) < kind_rank(b.kind);
}

std::string to_string(FactorKind kind) {
  switch (kind) {
    case FactorKind::Prior: return "Prior";
    case FactorKind::Imu: return "Imu";
    case FactorKind::Depth: return "Depth";
    case FactorKind::Velocity: return "Velocity";
    case FactorKind::RangeBearing: return "RangeBearing";
    case FactorKind::MotionModel: return "MotionModel";
  }
  return "Unknown";
}

int tangent_dim(VariableKind kind) {
  switch (kind) {
    case VariableKind::ChaserState: return 9;
    case VariableKind::TargetPosition: return 3;
    case VariableKind::TargetSpeed: return 1;
    case VariableKind::TargetHeading: return 1;
    case VariableKind::ImuBias: return 6;
  }
  return 0;
}

int tangent_dim(const Variable& v) {
  return std::visit(Overloaded{[](const ChaserState&) { return 9; },
                               [](const TargetPosition&) { return 3; },
                               [](const TargetSpeed&) { return 1; },
                               [](const Heading&) { return 1; },
                               [](const ImuBias&) { return 6; }},
                    v);
}

Variable retract(const Variable& v, const Eigen::VectorXd& d) {
  if (d.size() != tangent_dim(v)) {
    throw std::invalid_argument("retract: increment dimension mismatch");
  }
  return std::visit(
      Overloaded{
          [&](const ChaserState& x) -> Variable { return chaser_retract(x, Vec9(d)); },
          [&](const TargetPosition& x) -> Variable { return TargetPosition{x.position + d}; },
          [&](const TargetSpeed& x) -> Variable { return TargetSpeed{x.value + d(0)}; },
          [&](const Heading& x) -> Variable { return x.retract(d(0)); },
          [&](const ImuBias& x) -> Variable { return ImuBias::FromVector(x.vector() + Vec6(d)); }},
      v);
}

Eigen::VectorXd local_coordinates(const Variable& from, const Variable& to) {
  if (from.index() != to.index()) {
    throw std::invalid_argument("local_coordinates: variable types differ");
  }
  return std::visit(
      Overloaded{
          [&](const ChaserState& a) -> Eigen::VectorXd {
            return chaser_local_coordinates(a, std::get<ChaserState>(to));
          },
          [&](const TargetPosition& a) -> Eigen::VectorXd {
            return std::get<TargetPosition>(to).position - a.position;
          },
          [&](const TargetSpeed& a) -> Eigen::VectorXd {
            return Eigen::VectorXd::Constant(1, std::get<TargetSpeed>(to).value - a.value);
          },
          [&](const Heading& a) -> Eigen::VectorXd {
            return Eigen::VectorXd::Constant(1, std::get<Heading>(to).minus(a));
          },
          [&](const ImuBias& a) -> Eigen::VectorXd {
            return std::get<ImuBias>(to).vector() - a.vector();
          }},
      from);
}

Eigen::MatrixXd local_coordinates_jacobian(const Variable& mean, const Variable& x) {
  const int n = tangent_dim(x);
  Eigen::MatrixXd J = Eigen::MatrixXd::Identity(n, n);
  if (const auto* c = std::get_if<ChaserState>(&x)) {
    const auto& m = std::get<ChaserState>(mean);
    const Mat3 rel = m.pose.rotation().transpose() * c->pose.rotation();
    J.block<3, 3>(0, 0) = so3_right_jacobian_inverse(so3_log(rel));
    J.block<3, 3>(3, 3) = rel;
  }
  return J;
}

void Values::insert(const VariableKey& key, Variable value) {
  if (!values_.emplace(key, std::move(value)).second) {
    throw std::invalid_argument("Values::insert: duplicate key " + to_string(key));
  }
}

void Values::update(const VariableKey& key, Variable value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::out_of_range("Values::update: missing key " + to_string(key));
  }
  it->second = std::move(value);
}

const Variable& Values::at(const VariableKey& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::out_of_range("Values::at: missing key " + to_string(key));
  }
  return it->second;
}

Factor::Factor(FactorKind kind, std::vector<VariableKey> keys, NoiseModel noise)
    : kind_(kind), keys_(std::move(keys)), noise_(std::move(noise)) {}

double Factor::cost(const Values& values) const {
  return noise_.squared_mahalanobis(evaluate(values, nullptr));
}

void Factor::linearize(const Values& values, Eigen::VectorXd& whitened_error,
                       Eigen::MatrixXd& whitened_jacobian) const {
  std::vector<Eigen::MatrixXd> blocks;
  whitened_error = noise_.whiten(evaluate(values, &blocks));
  int cols = 0;
  for (const auto& b : blocks) cols += static_cast<int>(b.cols());
  Eigen::MatrixXd J(dim(), cols);
  int c = 0;
  for (const auto& b : blocks) {
    J.middleCols(c, b.cols()) = b;
    c += static_cast<int>(b.cols());
  }
  whitened_jacobian = noise_.whiten(J);
}

PriorFactor::PriorFactor(std::vector<VariableKey> keys, std::vector<Variable> means, NoiseModel noise)
    : Factor(FactorKind::Prior, std::move(keys), std::move(noise)), means_(std::move(means)) {
  if (means_.size() != this->keys().size()) {
    throw std::invalid_argument("PriorFactor: one mean per key required");
  }
  int total = 0;
  for (std::size_t k = 0; k < means_.size(); ++k) {
    if (tangent_dim(means_[k]) != tangent_dim(this->keys()[k].kind)) {
      throw std::invalid_argument("PriorFactor: mean type does not match key kind");
    }
    total += tangent_dim(means_[k]);
  }
  if (total != dim()) {
    throw std::invalid_argument("PriorFactor: noise dimension does not match residual");
  }
}

Eigen::VectorXd PriorFactor::evaluate(const Values& values,
                                      std::vector<Eigen::MatrixXd>* jacobians) const {
  Eigen::VectorXd r(dim());
  if (jacobians) jacobians->assign(keys().size(), Eigen::MatrixXd());
  int row = 0;
  for (std::size_t k = 0; k < keys().size(); ++k) {
    const Variable& x = values.at(keys()[k]);
    const int n = tangent_dim(x);
    r.segment(row, n) = local_coordinates(means_[k], x);
    if (jacobians) {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim(), n);
      J.block(row, 0, n, n) = local_coordinates_jacobian(means_[k], x);
      (*jacobians)[k] = std::move(J);
    }
    row += n;
  }
  return r;
}

ImuFactor::ImuFactor(int i, int j, PreintegratedImu delta, const ImuParams& params)
    : Factor(FactorKind::Imu, {chaser_key(i), chaser_key(j), bias_key(i), bias_key(j)},
             imu_noise_model(delta, params)),
      delta_(std::move(delta)),
      sqrt_information_(noise().sqrt_information()) {}

Eigen::VectorXd ImuFactor::evaluate(const Values& values,
                                    std::vector<Eigen::MatrixXd>* jacobians) const {
  const ImuResidual r = imu_residual(values.get<ChaserState>(keys()[0]),
                                     values.get<ChaserState>(keys()[1]),
                                     values.get<ImuBias>(keys()[2]),
                                     values.get<ImuBias>(keys()[3]), delta_);
  if (jacobians) {
    *jacobians = {r.d_state_i, r.d_state_j, r.d_bias_i, r.d_bias_j};
  }
  return r.error;
}

void ImuFactor::linearize(const Values& values, Eigen::VectorXd& whitened_error,
                          Eigen::MatrixXd& whitened_jacobian) const {
  const ImuResidual r = imu_residual(values.get<ChaserState>(keys()[0]),
                                     values.get<ChaserState>(keys()[1]),
                                     values.get<ImuBias>(keys()[2]),
                                     values.get<ImuBias>(keys()[3]), delta_);
  Eigen::Matrix<double, 15, 30> J;
  J << r.d_state_i, r.d_state_j, r.d_bias_i, r.d_bias_j;
  // The square-root information is blockdiag(9x9 lower, diagonal 6x6).
  const Mat9 L9 = sqrt_information_.topLeftCorner<9, 9>();
  const Vec6 d6 = sqrt_information_.bottomRightCorner<6, 6>().diagonal();
  whitened_error.resize(15);
  whitened_error.head<9>() = L9 * r.error.head<9>();
  whitened_error.tail<6>() = d6.cwiseProduct(r.error.tail<6>());
  whitened_jacobian.resize(15, 30);
  whitened_jacobian.topRows<9>() = L9.lazyProduct(J.topRows<9>());
  whitened_jacobian.bottomRows<6>() = d6.asDiagonal() * J.bottomRows<6>();
}

DepthFactor::DepthFactor(int i, double z_d, double sigma)
    : Factor(FactorKind::Depth, {chaser_key(i)}, NoiseModel::Isotropic(1, sigma)), z_d_(z_d) {}

Eigen::VectorXd DepthFactor::evaluate(const Values& values,
                                      std::vector<Eigen::MatrixXd>* jacobians) const {
  const DepthResidual r = depth_residual(values.get<ChaserState>(keys()[0]), z_d_);
  if (jacobians) *jacobians = {Eigen::MatrixXd(r.d_chaser)};
  return Eigen::VectorXd::Constant(1, r.error);
}

VelocityFactor::VelocityFactor(int i, const Vec3& z_v, double sigma)
    : Factor(FactorKind::Velocity, {chaser_key(i)}, NoiseModel::Isotropic(3, sigma)), z_v_(z_v) {}

Eigen::VectorXd VelocityFactor::evaluate(const Values& values,
                                         std::vector<Eigen::MatrixXd>* jacobians) const {
  const VelocityResidual r = velocity_residual(values.get<ChaserState>(keys()[0]), z_v_);
  if (jacobians) *jacobians = {Eigen::MatrixXd(r.d_chaser)};
  return r.error;
}

RangeBearingFactor::RangeBearingFactor(int i, const RangeBearingMeas& z, const UsblNoiseParams& params)
    : Factor(FactorKind::RangeBearing, {chaser_key(i), target_key(i)}, usbl_noise_model(z.range, params)),
      z_(z) {}

Eigen::VectorXd RangeBearingFactor::evaluate(const Values& values,
                                             std::vector<Eigen::MatrixXd>* jacobians) const {
  const RangeBearingResidual r = range_bearing_residual(values.get<ChaserState>(keys()[0]),
                                                        values.get<TargetPosition>(keys()[1]), z_);
  if (jacobians) *jacobians = {Eigen::MatrixXd(r.d_chaser), Eigen::MatrixXd(r.d_target)};
  return r.error;
}

MotionModelFactor::MotionModelFactor(int i, int j, double dt, const Vec3& sigmas)
    : Factor(FactorKind::MotionModel, {target_key(i), target_key(j), speed_key(), heading_key()},
             NoiseModel::Diagonal(sigmas)),
      dt_(dt) {
  if (!(dt > 0.0)) {
    throw std::invalid_argument("MotionModelFactor: dt must be positive");
  }
}

Eigen::VectorXd MotionModelFactor::evaluate(const Values& values,
                                            std::vector<Eigen::MatrixXd>* jacobians) const {
  TargetMotionParams params;
  params.speed = values.get<TargetSpeed>(keys()[2]).value;
  params.heading = values.get<Heading>(keys()[3]);
  const MotionModelResidual r = motion_model_residual(values.get<TargetPosition>(keys()[0]),
                                                      values.get<TargetPosition>(keys()[1]), params, dt_);
  if (jacobians) {
    *jacobians = {Eigen::MatrixXd(r.d_from), Eigen::MatrixXd(r.d_to), Eigen::MatrixXd(r.d_speed),
                  Eigen::MatrixXd(r.d_heading)};
  }
  return r.error;
}

void FactorGraph::add_factor(FactorPtr factor) {
  if (!factor) throw std::invalid_argument("FactorGraph::add_factor: null factor");
  factors_.push_back(std::move(factor));
}

void FactorGraph::remove_factor(std::size_t index) {
  if (index >= factors_.size()) throw std::out_of_range("FactorGraph::remove_factor");
  factors_.erase(factors_.begin() + static_cast<std::ptrdiff_t>(index));
}

void FactorGraph::replace_factor(std::size_t index, FactorPtr factor) {
  if (index >= factors_.size()) throw std::out_of_range("FactorGraph::replace_factor");
  if (!factor) throw std::invalid_argument("FactorGraph::replace_factor: null factor");
  factors_[index] = std::move(factor);
}

double FactorGraph::total_cost(const Values& values) const {
  double c = 0.0;
  for (const auto& f : factors_) c += f->cost(values);
  return c;
}

void FactorGraph::check_consistency() const {
  for (const auto& f : factors_) {
    for (const auto& k : f->keys()) {
      if (!values_.contains(k)) {
        throw std::logic_error("factor " + to_string(f->kind()) + " references missing variable " +
                               to_string(k));
      }
    }
  }
}

}  // namespace homing
