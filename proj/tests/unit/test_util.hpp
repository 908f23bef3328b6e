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

// Shared helpers for the unit tests: seeded random inputs and central
// finite differences taken through the library's own retractions.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>

#include <Eigen/Core>

#include "homing/factors.hpp"
#include "homing/imu.hpp"
#include "homing/manifold.hpp"

namespace homing::testing {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen_() >> 11) * (1.0 / 9007199254740992.0);
  }
  Vec3 vec3(double lo, double hi) { return {uniform(lo, hi), uniform(lo, hi), uniform(lo, hi)}; }
  Mat3 rotation() { return rotation_from_ypr(uniform(-3.1, 3.1), uniform(-1.4, 1.4), uniform(-3.1, 3.1)); }
  Pose3 pose(double extent = 50.0) { return Pose3(rotation(), vec3(-extent, extent)); }
  ChaserState chaser(double extent = 50.0) { return {pose(extent), vec3(-2.0, 2.0)}; }
  UnitBearing bearing() {
    for (;;) {
      const Vec3 v = vec3(-1.0, 1.0);
      if (v.norm() > 0.1 && v.norm() < 1.0) return UnitBearing(v);
    }
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

/// Central differences of f(x ⊕ δ) with respect to δ; `retract` defines ⊕.
template <typename X>
Eigen::MatrixXd numerical_jacobian(const std::function<Eigen::VectorXd(const X&)>& f,
                                   const std::function<X(const X&, const Eigen::VectorXd&)>& retract,
                                   const X& x, int dim, double h = 1e-6) {
  const Eigen::VectorXd f0 = f(x);
  Eigen::MatrixXd J(f0.size(), dim);
  for (int i = 0; i < dim; ++i) {
    Eigen::VectorXd d = Eigen::VectorXd::Zero(dim);
    d(i) = h;
    J.col(i) = (f(retract(x, d)) - f(retract(x, -d))) / (2.0 * h);
  }
  return J;
}

inline ChaserState retract_chaser(const ChaserState& x, const Eigen::VectorXd& d) {
  return chaser_retract(x, Vec9(d));
}
inline Vec3 retract_vec3(const Vec3& x, const Eigen::VectorXd& d) { return x + Vec3(d); }
inline ImuBias retract_bias(const ImuBias& b, const Eigen::VectorXd& d) {
  return ImuBias::FromVector(b.vector() + Vec6(d));
}

/// ‖A − B‖_F / max(‖B‖_F, floor).
inline double relative_error(const Eigen::MatrixXd& analytic, const Eigen::MatrixXd& numeric,
                             double floor = 1e-12) {
  return (analytic - numeric).norm() / std::max(numeric.norm(), floor);
}

}  // namespace homing::testing
