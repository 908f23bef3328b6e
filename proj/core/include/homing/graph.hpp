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

/**
 * @file graph.hpp
 * @brief Variable keys, manifold-valued variable storage and the factor
 *        types that make up the homing factor graph.
 */

#pragma once

#include <compare>
#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "homing/factors.hpp"
#include "homing/imu.hpp"

namespace homing {

enum class VariableKind { ChaserState, TargetPosition, TargetSpeed, TargetHeading, ImuBias };

struct VariableKey {
  VariableKind kind = VariableKind::ChaserState;
  int index = 0;

  auto operator<=>(const VariableKey&) const = default;
};

inline VariableKey chaser_key(int i) { return {VariableKind::ChaserState, i}; }
inline VariableKey target_key(int i) { return {VariableKind::TargetPosition, i}; }
inline VariableKey bias_key(int i) { return {VariableKind::ImuBias, i}; }
inline VariableKey speed_key() { return {VariableKind::TargetSpeed, 0}; }
inline VariableKey heading_key() { return {VariableKind::TargetHeading, 0}; }

std::string to_string(const VariableKey& key);

/// Elimination order: chronological by keyframe, shared speed and heading last.
bool elimination_less(const VariableKey& a, const VariableKey& b);

/// Scalar target speed, kept distinct from other scalars in the variant.
struct TargetSpeed {
  double value = 0.0;
};

using Variable = std::variant<ChaserState, TargetPosition, TargetSpeed, Heading, ImuBias>;

int tangent_dim(VariableKind kind);
int tangent_dim(const Variable& v);
Variable retract(const Variable& v, const Eigen::VectorXd& delta);
/// Inverse of retract: retract(from, local_coordinates(from, to)) == to.
Eigen::VectorXd local_coordinates(const Variable& from, const Variable& to);
/// Derivative of local_coordinates(mean, retract(x, d)) with respect to d at d = 0.
Eigen::MatrixXd local_coordinates_jacobian(const Variable& mean, const Variable& x);

/// Keyed collection of variable values.
class Values {
 public:
  bool contains(const VariableKey& key) const { return values_.count(key) != 0; }
  void insert(const VariableKey& key, Variable value);
  void update(const VariableKey& key, Variable value);
  const Variable& at(const VariableKey& key) const;
  std::size_t size() const { return values_.size(); }

  template <typename T>
  const T& get(const VariableKey& key) const {
    return std::get<T>(at(key));
  }

  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

 private:
  std::map<VariableKey, Variable> values_;
};

enum class FactorKind { Prior, Imu, Depth, Velocity, RangeBearing, MotionModel };

std::string to_string(FactorKind kind);

/// A residual over an ordered set of variables with a Gaussian noise model.
class Factor {
 public:
  Factor(FactorKind kind, std::vector<VariableKey> keys, NoiseModel noise);
  virtual ~Factor() = default;

  FactorKind kind() const { return kind_; }
  const std::vector<VariableKey>& keys() const { return keys_; }
  const NoiseModel& noise() const { return noise_; }
  int dim() const { return noise_.dim(); }

  /// Unwhitened residual. When `jacobians` is non-null it receives one block
  /// per key, each dim() x tangent_dim(key).
  virtual Eigen::VectorXd evaluate(const Values& values,
                                   std::vector<Eigen::MatrixXd>* jacobians) const = 0;

  /// Squared Mahalanobis norm of the residual.
  double cost(const Values& values) const;

  /// Whitened residual and the whitened Jacobian blocks stacked column-wise
  /// in key order.
  virtual void linearize(const Values& values, Eigen::VectorXd& whitened_error,
                         Eigen::MatrixXd& whitened_jacobian) const;

 private:
  FactorKind kind_;
  std::vector<VariableKey> keys_;
  NoiseModel noise_;
};

using FactorPtr = std::shared_ptr<const Factor>;

/// Prior on one or more variables; the residual stacks local_coordinates(mean, x).
class PriorFactor final : public Factor {
 public:
  PriorFactor(std::vector<VariableKey> keys, std::vector<Variable> means, NoiseModel noise);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;
  const std::vector<Variable>& means() const { return means_; }

 private:
  std::vector<Variable> means_;
};

/// Keys: chaser_i, chaser_j, bias_i, bias_j.
class ImuFactor final : public Factor {
 public:
  ImuFactor(int i, int j, PreintegratedImu delta, const ImuParams& params);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;
  void linearize(const Values& values, Eigen::VectorXd& whitened_error,
                 Eigen::MatrixXd& whitened_jacobian) const override;
  const PreintegratedImu& delta() const { return delta_; }

 private:
  PreintegratedImu delta_;
  Mat15 sqrt_information_;
};

class DepthFactor final : public Factor {
 public:
  DepthFactor(int i, double z_d, double sigma);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;

 private:
  double z_d_;
};

class VelocityFactor final : public Factor {
 public:
  VelocityFactor(int i, const Vec3& z_v, double sigma);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;

 private:
  Vec3 z_v_;
};

/// Keys: chaser_i, target_i.
class RangeBearingFactor final : public Factor {
 public:
  RangeBearingFactor(int i, const RangeBearingMeas& z, const UsblNoiseParams& params);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;

 private:
  RangeBearingMeas z_;
};

/// Keys: target_i, target_j, speed, heading.
class MotionModelFactor final : public Factor {
 public:
  MotionModelFactor(int i, int j, double dt, const Vec3& sigmas);
  Eigen::VectorXd evaluate(const Values& values, std::vector<Eigen::MatrixXd>* jacobians) const override;

 private:
  double dt_;
};

/// Variables, factors and keyframe bookkeeping. Single writer.
class FactorGraph {
 public:
  Values& values() { return values_; }
  const Values& values() const { return values_; }
  const std::vector<FactorPtr>& factors() const { return factors_; }
  const std::vector<double>& keyframe_times() const { return keyframe_times_; }
  int num_keyframes() const { return static_cast<int>(keyframe_times_.size()); }

  void add_factor(FactorPtr factor);
  /// Removes the factor at `index` (used by tests and diagnostics).
  void remove_factor(std::size_t index);
  void replace_factor(std::size_t index, FactorPtr factor);
  void add_keyframe_time(double t) { keyframe_times_.push_back(t); }

  /// Sum of squared Mahalanobis residuals at `values`.
  double total_cost(const Values& values) const;
  double total_cost() const { return total_cost(values_); }

  /// Throws std::logic_error if a factor references a missing variable.
  void check_consistency() const;

 private:
  Values values_;
  std::vector<FactorPtr> factors_;
  std::vector<double> keyframe_times_;
};

}  // namespace homing
