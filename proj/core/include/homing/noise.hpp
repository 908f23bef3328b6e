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

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace homing {

/// Gaussian noise model backed by the Cholesky factor of its covariance.
/// Whitening maps a residual r to L^{-1} r so that |L^{-1} r|^2 is the
/// squared Mahalanobis distance.
class NoiseModel {
 public:
  /// Throws std::invalid_argument unless covariance is symmetric positive definite.
  explicit NoiseModel(const Eigen::MatrixXd& covariance);

  static NoiseModel Diagonal(const Eigen::VectorXd& sigmas);
  static NoiseModel Isotropic(int dim, double sigma);

  int dim() const { return static_cast<int>(covariance_.rows()); }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  Eigen::VectorXd whiten(const Eigen::VectorXd& r) const;
  Eigen::MatrixXd whiten(const Eigen::MatrixXd& J) const;
  double squared_mahalanobis(const Eigen::VectorXd& r) const { return whiten(r).squaredNorm(); }
  /// Lower-triangular square-root information matrix L^{-1}.
  const Eigen::MatrixXd& sqrt_information() const { return inverse_lower_; }

 private:
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd lower_;  // covariance = lower_ * lower_^T
  Eigen::VectorXd inverse_sigmas_;  // set only for diagonal covariances
  Eigen::MatrixXd inverse_lower_;   // lower_^{-1}
};

}  // namespace homing
