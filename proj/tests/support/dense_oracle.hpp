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

// Brute-force Gauss-Newton: dense normal equations built from raw residuals,
// raw Jacobians and explicitly inverted covariances. Shares only the factor
// evaluations and the per-variable retraction with the production solver.

#pragma once

#include <map>
#include <vector>

#include <Eigen/Dense>

#include "homing/graph.hpp"

namespace homing::testing {

struct DenseSystem {
  Eigen::MatrixXd H;
  Eigen::VectorXd b;  // J^T Sigma^-1 r
  double cost = 0.0;
  std::map<VariableKey, int> offset;
};

inline DenseSystem dense_normal_equations(const FactorGraph& graph, const Values& values) {
  DenseSystem s;
  int n = 0;
  for (const auto& [key, var] : values) {
    s.offset[key] = n;
    n += tangent_dim(var);
  }
  s.H = Eigen::MatrixXd::Zero(n, n);
  s.b = Eigen::VectorXd::Zero(n);
  for (const auto& f : graph.factors()) {
    std::vector<Eigen::MatrixXd> blocks;
    const Eigen::VectorXd r = f->evaluate(values, &blocks);
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(r.size(), n);
    for (std::size_t k = 0; k < f->keys().size(); ++k) {
      J.middleCols(s.offset.at(f->keys()[k]), blocks[k].cols()) += blocks[k];
    }
    const Eigen::MatrixXd info = f->noise().covariance().inverse();
    s.H += J.transpose() * info * J;
    s.b += J.transpose() * info * r;
    s.cost += r.dot(info * r);
  }
  return s;
}

inline Values dense_retract(const Values& values, const DenseSystem& s, const Eigen::VectorXd& delta) {
  Values out;
  for (const auto& [key, var] : values) {
    out.insert(key, retract(var, delta.segment(s.offset.at(key), tangent_dim(var))));
  }
  return out;
}

/// Undamped Gauss-Newton from `initial` until the step norm drops below `tol`.
inline Values dense_gauss_newton(const FactorGraph& graph, Values initial, int max_iterations = 100,
                                 double tol = 1e-12) {
  for (int it = 0; it < max_iterations; ++it) {
    const DenseSystem s = dense_normal_equations(graph, initial);
    const Eigen::VectorXd delta = s.H.ldlt().solve(-s.b);
    initial = dense_retract(initial, s, delta);
    if (delta.norm() < tol) break;
  }
  return initial;
}

/// Largest tangent-space distance between matching variables.
inline double max_variable_distance(const Values& a, const Values& b) {
  double worst = 0.0;
  for (const auto& [key, var] : a) worst = std::max(worst, local_coordinates(var, b.at(key)).norm());
  return worst;
}

}  // namespace homing::testing
