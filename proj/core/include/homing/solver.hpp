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
 * @file solver.hpp
 * @brief Levenberg-Marquardt over a FactorGraph using a sparse Cholesky
 *        factorization of the damped normal equations.
 */

#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "homing/graph.hpp"

namespace homing {

struct LmOptions {
  int max_iterations = 100;
  double initial_lambda = 1e-4;
  double lambda_up = 10.0;
  double lambda_down = 10.0;
  double min_lambda = 1e-12;
  double max_lambda = 1e6;
  double gradient_tolerance = 1e-8;
  double relative_cost_tolerance = 1e-10;
  /// Lower bound for the diagonal damping term.
  double min_diagonal = 1e-9;
  bool compute_marginals = false;
  /// Undamped Gauss-Newton steps taken after convergence when the predicted
  /// decrease is below `cost_resolution` (relative to max(cost, 1)).
  int polish_steps = 3;
  double cost_resolution = 1e-12;
};

enum class LmStatus { Converged, MaxIterations, LinearSolveFailed, NonFiniteCost };

std::string to_string(LmStatus status);

struct LmSummary {
  LmStatus status = LmStatus::MaxIterations;
  int iterations = 0;
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double final_lambda = 0.0;
  double gradient_norm = 0.0;
  /// Costs after each accepted step, starting with the initial cost. Polish
  /// steps may raise the cost by at most the configured resolution.
  std::vector<double> cost_history;
  /// Post-convergence Gauss-Newton steps taken (not counted in `iterations`).
  int polish_steps = 0;
  std::string message;

  /// True when the solve could not produce a usable step.
  bool failed() const {
    return status == LmStatus::LinearSolveFailed || status == LmStatus::NonFiniteCost;
  }
};

/// Column layout of the stacked tangent vector.
class Ordering {
 public:
  explicit Ordering(const Values& values);

  int offset(const VariableKey& key) const { return offsets_.at(key); }
  int dim() const { return dim_; }
  const std::vector<VariableKey>& keys() const { return keys_; }

 private:
  std::vector<VariableKey> keys_;
  std::map<VariableKey, int> offsets_;
  int dim_ = 0;
};

/// Whitened Gauss-Newton system H = J^T J, g = J^T r at the given values.
/// Only the lower triangle of `hessian` is stored.
struct LinearSystem {
  Eigen::SparseMatrix<double> hessian;
  Eigen::VectorXd gradient;
  double cost = 0.0;
};

/// Block sparsity of J^T J for a fixed graph and ordering, reused across
/// relinearizations so the symbolic factorization is done once.
class HessianStructure {
 public:
  HessianStructure(const FactorGraph& graph, const Ordering& ordering);

  /// Refills `sys` in place; its hessian keeps this structure's pattern.
  void linearize(const FactorGraph& graph, const Values& values, LinearSystem& sys) const;

  const Eigen::SparseMatrix<double>& pattern() const { return pattern_; }
  /// Positions of the diagonal entries in the value array.
  const std::vector<int>& diagonal_index() const { return diagonal_; }

 private:
  struct Block {
    int row_key, col_key;        // indices into the factor's key list
    std::vector<int> column_start;  // value index of the first stored row, per block column
  };
  const Ordering& ordering_;
  Eigen::SparseMatrix<double> pattern_;
  std::vector<int> diagonal_;
  std::vector<std::vector<Block>> blocks_;  // per factor
  std::vector<std::vector<int>> offsets_;   // per factor, per key
};

LinearSystem linearize(const FactorGraph& graph, const Values& values, const Ordering& ordering);

/// Row-profile (skyline) Cholesky of a symmetric positive-definite matrix
/// given by its lower triangle. Fill stays inside the profile, which is
/// narrow when variables are ordered chronologically.
class ProfileCholesky {
 public:
  /// Records the profile of `lower`; later factorizations must share its pattern.
  void analyze(const Eigen::SparseMatrix<double>& lower);

  /// Factors lower + lambda * max(diag(lower), min_diagonal). Returns false if
  /// a pivot is not positive or not finite.
  bool factorize(const Eigen::SparseMatrix<double>& lower, double lambda = 0.0, double min_diagonal = 0.0);

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;

  int rows() const { return static_cast<int>(first_.size()); }
  /// Number of stored factor entries.
  std::size_t profile_size() const { return values_.size(); }

 private:
  /// Address of L(i, j) for first_[i] <= j <= i.
  double* entry(int i, int j) {
    return values_.data() + start_[static_cast<std::size_t>(i)] + (j - first_[static_cast<std::size_t>(i)]);
  }
  const double* entry(int i, int j) const {
    return values_.data() + start_[static_cast<std::size_t>(i)] + (j - first_[static_cast<std::size_t>(i)]);
  }

  std::vector<int> first_;           // leftmost stored column per row
  std::vector<std::size_t> start_;   // position of (i, first_[i]) in values_
  std::vector<std::size_t> scatter_; // input value index -> profile position
  std::vector<std::size_t> diag_in_; // input value index of each diagonal entry
  std::vector<double> values_;
  std::size_t input_nonzeros_ = 0;
};

/// Applies a stacked increment to every variable.
Values retract_all(const Values& values, const Ordering& ordering, const Eigen::VectorXd& delta);

struct LmResult {
  Values values;
  LmSummary summary;
  /// Marginal covariance diagonals per variable, filled when requested.
  std::map<VariableKey, Eigen::VectorXd> marginal_diagonals;
};

/// Minimizes graph.total_cost starting from graph.values(). The graph is not modified.
LmResult levenberg_marquardt(const FactorGraph& graph, const LmOptions& options = {});
LmResult levenberg_marquardt(const FactorGraph& graph, const Values& initial, const LmOptions& options);

}  // namespace homing
