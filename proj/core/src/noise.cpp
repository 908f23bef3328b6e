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

#include "homing/noise.hpp"

#include <algorithm>
#include <stdexcept>

namespace homing {

NoiseModel::NoiseModel(const Eigen::MatrixXd& covariance) : covariance_(covariance) {
  if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
    throw std::invalid_argument("NoiseModel: covariance must be square and non-empty");
  }
  if (!covariance.allFinite()) {
    throw std::invalid_argument("NoiseModel: covariance has non-finite entries");
  }
  const double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("NoiseModel: covariance is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("NoiseModel: covariance is not positive definite");
  }
  lower_ = llt.matrixL();
  const Eigen::MatrixXd off = covariance.triangularView<Eigen::StrictlyLower>();
  const Eigen::Index n = covariance.rows();
  inverse_lower_ = lower_.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(n, n));
  if (off.cwiseAbs().maxCoeff() == 0.0) inverse_sigmas_ = lower_.diagonal().cwiseInverse();
}

NoiseModel NoiseModel::Diagonal(const Eigen::VectorXd& sigmas) {
  return NoiseModel(sigmas.array().square().matrix().asDiagonal());
}

NoiseModel NoiseModel::Isotropic(int dim, double sigma) {
  return Diagonal(Eigen::VectorXd::Constant(dim, sigma));
}

Eigen::VectorXd NoiseModel::whiten(const Eigen::VectorXd& r) const {
  if (inverse_sigmas_.size() > 0) return inverse_sigmas_.cwiseProduct(r);
  return inverse_lower_.triangularView<Eigen::Lower>() * r;
}

Eigen::MatrixXd NoiseModel::whiten(const Eigen::MatrixXd& J) const {
  if (inverse_sigmas_.size() > 0) return inverse_sigmas_.asDiagonal() * J;
  return inverse_lower_.lazyProduct(J);
}

}  // namespace homing
