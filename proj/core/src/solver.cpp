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

#include "homing/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <stdexcept>

namespace homing {

std::string to_string(LmStatus status) {
  switch (status) {
    case LmStatus::Converged: return "converged";
    case LmStatus::MaxIterations: return "max_iterations";
    case LmStatus::LinearSolveFailed: return "linear_solve_failed";
    case LmStatus::NonFiniteCost: return "non_finite_cost";
  }
  return "unknown";
}

Ordering::Ordering(const Values& values) {
  for (const auto& [key, value] : values) keys_.push_back(key);
  std::sort(keys_.begin(), keys_.end(), elimination_less);
  for (const auto& key : keys_) {
    offsets_[key] = dim_;
    dim_ += tangent_dim(key.kind);
  }
}

HessianStructure::HessianStructure(const FactorGraph& graph, const Ordering& ordering)
    : ordering_(ordering) {
  const int n = ordering.dim();
  const auto& factors = graph.factors();
  offsets_.resize(factors.size());

  // Lower-triangle entries of every block touched by a factor, plus the diagonal.
  std::vector<Eigen::Triplet<double>> entries;
  for (int i = 0; i < n; ++i) entries.emplace_back(i, i, 0.0);
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& keys = factors[f]->keys();
    for (const auto& key : keys) offsets_[f].push_back(ordering.offset(key));
    for (std::size_t a = 0; a < keys.size(); ++a) {
      for (std::size_t b = 0; b < keys.size(); ++b) {
        const int oa = offsets_[f][a], ob = offsets_[f][b];
        if (oa < ob) continue;
        const int da = tangent_dim(keys[a].kind), db = tangent_dim(keys[b].kind);
        for (int j = 0; j < db; ++j) {
          for (int i = (a == b ? j : 0); i < da; ++i) entries.emplace_back(oa + i, ob + j, 0.0);
        }
      }
    }
  }
  pattern_.resize(n, n);
  pattern_.setFromTriplets(entries.begin(), entries.end());
  pattern_.makeCompressed();

  const int* outer = pattern_.outerIndexPtr();
  const int* inner = pattern_.innerIndexPtr();
  const auto find = [&](int row, int col) {
    const int* it = std::lower_bound(inner + outer[col], inner + outer[col + 1], row);
    return static_cast<int>(it - inner);
  };
  diagonal_.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) diagonal_[static_cast<std::size_t>(i)] = find(i, i);

  blocks_.resize(factors.size());
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const auto& keys = factors[f]->keys();
    for (std::size_t a = 0; a < keys.size(); ++a) {
      for (std::size_t b = 0; b < keys.size(); ++b) {
        const int oa = offsets_[f][a], ob = offsets_[f][b];
        if (oa < ob) continue;
        Block blk{static_cast<int>(a), static_cast<int>(b), {}};
        for (int j = 0; j < tangent_dim(keys[b].kind); ++j) {
          blk.column_start.push_back(find(a == b ? oa + j : oa, ob + j));
        }
        blocks_[f].push_back(std::move(blk));
      }
    }
  }
}

void HessianStructure::linearize(const FactorGraph& graph, const Values& values, LinearSystem& sys) const {
  if (sys.hessian.nonZeros() != pattern_.nonZeros() || sys.hessian.rows() != pattern_.rows()) {
    sys.hessian = pattern_;
  }
  double* H = sys.hessian.valuePtr();
  std::fill(H, H + sys.hessian.nonZeros(), 0.0);
  sys.gradient.setZero(ordering_.dim());
  sys.cost = 0.0;

  Eigen::VectorXd wr;
  Eigen::MatrixXd wj;
  Eigen::VectorXd g;
  Eigen::MatrixXd JtJ;
  std::vector<int> col;
  const auto& factors = graph.factors();
  for (std::size_t f = 0; f < factors.size(); ++f) {
    const Factor& factor = *factors[f];
    factor.linearize(values, wr, wj);
    sys.cost += wr.squaredNorm();

    const auto& keys = factor.keys();
    col.assign(keys.size() + 1, 0);
    for (std::size_t a = 0; a < keys.size(); ++a) col[a + 1] = col[a] + tangent_dim(keys[a].kind);
    g.noalias() = wj.transpose() * wr;
    JtJ.setZero(wj.cols(), wj.cols());
    JtJ.selfadjointView<Eigen::Lower>().rankUpdate(wj.transpose());
    for (std::size_t a = 0; a < keys.size(); ++a) {
      sys.gradient.segment(offsets_[f][a], col[a + 1] - col[a]) += g.segment(col[a], col[a + 1] - col[a]);
    }
    for (const Block& blk : blocks_[f]) {
      const int r0 = col[static_cast<std::size_t>(blk.row_key)];
      const int c0 = col[static_cast<std::size_t>(blk.col_key)];
      const int rows = col[static_cast<std::size_t>(blk.row_key) + 1] - r0;
      const bool diagonal = blk.row_key == blk.col_key;
      // Only the lower triangle of JtJ is filled; read the mirror when needed.
      const Eigen::Index ld = JtJ.rows();
      for (std::size_t j = 0; j < blk.column_start.size(); ++j) {
        double* dst = H + blk.column_start[j];
        const int cj = c0 + static_cast<int>(j);
        if (r0 >= c0) {
          const double* src = JtJ.data() + cj * ld + r0;
          for (int i = diagonal ? static_cast<int>(j) : 0; i < rows; ++i) *dst++ += src[i];
        } else {
          for (int i = 0; i < rows; ++i) *dst++ += JtJ.data()[(r0 + i) * ld + cj];
        }
      }
    }
  }
}

LinearSystem linearize(const FactorGraph& graph, const Values& values, const Ordering& ordering) {
  const HessianStructure structure(graph, ordering);
  LinearSystem sys;
  structure.linearize(graph, values, sys);
  return sys;
}

Values retract_all(const Values& values, const Ordering& ordering, const Eigen::VectorXd& delta) {
  Values out;
  for (const auto& [key, value] : values) {
    const int d = tangent_dim(key.kind);
    out.insert(key, retract(value, delta.segment(ordering.offset(key), d)));
  }
  return out;
}

namespace {

double dot(const double* a, const double* b, int n) {
  if (n <= 0) return 0.0;
  return Eigen::Map<const Eigen::VectorXd>(a, n).dot(Eigen::Map<const Eigen::VectorXd>(b, n));
}

}  // namespace

void ProfileCholesky::analyze(const Eigen::SparseMatrix<double>& lower) {
  if (lower.rows() != lower.cols()) throw std::invalid_argument("ProfileCholesky: matrix is not square");
  if (!lower.isCompressed()) throw std::invalid_argument("ProfileCholesky: matrix must be compressed");
  const int n = static_cast<int>(lower.rows());
  const int* outer = lower.outerIndexPtr();
  const int* inner = lower.innerIndexPtr();
  first_.assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) first_[static_cast<std::size_t>(i)] = i;
  for (int c = 0; c < n; ++c) {
    for (int k = outer[c]; k < outer[c + 1]; ++k) {
      if (inner[k] < c) throw std::invalid_argument("ProfileCholesky: entry above the diagonal");
      auto& f = first_[static_cast<std::size_t>(inner[k])];
      f = std::min(f, c);
    }
  }
  start_.assign(static_cast<std::size_t>(n), 0);
  std::size_t size = 0;
  for (int i = 0; i < n; ++i) {
    start_[static_cast<std::size_t>(i)] = size;
    size += static_cast<std::size_t>(i - first_[static_cast<std::size_t>(i)] + 1);
  }
  values_.assign(size, 0.0);
  input_nonzeros_ = static_cast<std::size_t>(lower.nonZeros());
  scatter_.assign(input_nonzeros_, 0);
  diag_in_.clear();
  for (int c = 0; c < n; ++c) {
    for (int k = outer[c]; k < outer[c + 1]; ++k) {
      const auto r = static_cast<std::size_t>(inner[k]);
      scatter_[static_cast<std::size_t>(k)] = start_[r] + static_cast<std::size_t>(c - first_[r]);
      if (inner[k] == c) diag_in_.push_back(static_cast<std::size_t>(k));
    }
  }
  if (diag_in_.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("ProfileCholesky: pattern must include the full diagonal");
  }
}

bool ProfileCholesky::factorize(const Eigen::SparseMatrix<double>& lower, double lambda, double min_diagonal) {
  if (static_cast<std::size_t>(lower.nonZeros()) != input_nonzeros_ || lower.rows() != rows()) {
    throw std::invalid_argument("ProfileCholesky: pattern differs from the analyzed one");
  }
  std::fill(values_.begin(), values_.end(), 0.0);
  const double* in = lower.valuePtr();
  for (std::size_t k = 0; k < input_nonzeros_; ++k) values_[scatter_[k]] = in[k];
  if (lambda != 0.0) {
    for (std::size_t k : diag_in_) values_[scatter_[k]] += lambda * std::max(in[k], min_diagonal);
  }

  const int n = rows();
  for (int i = 0; i < n; ++i) {
    const int fi = first_[static_cast<std::size_t>(i)];
    double* row_i = entry(i, fi);
    for (int j = fi; j < i; ++j) {
      const int k0 = std::max(fi, first_[static_cast<std::size_t>(j)]);
      double& lij = row_i[j - fi];
      lij = (lij - dot(entry(i, k0), entry(j, k0), j - k0)) / *entry(j, j);
    }
    const double d = row_i[i - fi] - dot(row_i, row_i, i - fi);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    row_i[i - fi] = std::sqrt(d);
  }
  return true;
}

Eigen::VectorXd ProfileCholesky::solve(const Eigen::VectorXd& b) const {
  const int n = rows();
  if (b.size() != n) throw std::invalid_argument("ProfileCholesky: right-hand side size mismatch");
  Eigen::VectorXd x = b;
  for (int i = 0; i < n; ++i) {
    const int fi = first_[static_cast<std::size_t>(i)];
    x(i) = (x(i) - dot(entry(i, fi), x.data() + fi, i - fi)) / *entry(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    const int fi = first_[static_cast<std::size_t>(i)];
    x(i) /= *entry(i, i);
    if (i > fi) x.segment(fi, i - fi) -= x(i) * Eigen::Map<const Eigen::VectorXd>(entry(i, fi), i - fi);
  }
  return x;
}

LmResult levenberg_marquardt(const FactorGraph& graph, const LmOptions& options) {
  return levenberg_marquardt(graph, graph.values(), options);
}

LmResult levenberg_marquardt(const FactorGraph& graph, const Values& initial, const LmOptions& options) {
  const Ordering ordering(initial);
  const HessianStructure structure(graph, ordering);
  LmResult result;
  result.values = initial;
  LmSummary& s = result.summary;

  LinearSystem sys;
  structure.linearize(graph, result.values, sys);
  s.initial_cost = sys.cost;
  s.cost_history.push_back(sys.cost);
  if (!std::isfinite(sys.cost)) {
    s.status = LmStatus::NonFiniteCost;
    s.final_cost = sys.cost;
    s.message = "initial cost is not finite";
    return result;
  }

  double lambda = options.initial_lambda;
  ProfileCholesky chol;
  chol.analyze(structure.pattern());
  bool done = false;
  s.status = LmStatus::MaxIterations;
  while (!done && s.iterations < options.max_iterations) {
    s.gradient_norm = sys.gradient.lpNorm<Eigen::Infinity>();
    if (s.gradient_norm < options.gradient_tolerance) {
      s.status = LmStatus::Converged;
      break;
    }
    ++s.iterations;

    // Inner loop: raise lambda until a step decreases the cost.
    bool accepted = false;
    while (!accepted) {
      bool usable = chol.factorize(sys.hessian, lambda, options.min_diagonal);
      Eigen::VectorXd delta;
      if (usable) {
        delta = chol.solve(-sys.gradient);
        usable = delta.allFinite();
      }
      if (usable) {
        const Values candidate = retract_all(result.values, ordering, delta);
        const double new_cost = graph.total_cost(candidate);
        if (std::isfinite(new_cost) && new_cost <= sys.cost) {
          const double decrease = sys.cost - new_cost;
          result.values = candidate;
          accepted = true;
          lambda = std::max(lambda / options.lambda_down, options.min_lambda);
          const double old_cost = sys.cost;
          structure.linearize(graph, result.values, sys);
          s.cost_history.push_back(sys.cost);
          if (old_cost <= 0.0 || decrease <= options.relative_cost_tolerance * old_cost) {
            s.status = LmStatus::Converged;
            done = true;
          }
          break;
        }
      }
      if (lambda >= options.max_lambda) {
        if (usable) {
          // No descent available even with heavy damping: a stationary point.
          s.status = LmStatus::Converged;
          s.message = "no cost decrease at maximum damping";
        } else {
          s.status = LmStatus::LinearSolveFailed;
          s.message = "damped normal equations not positive definite at maximum damping";
        }
        done = true;
        break;
      }
      lambda = std::min(lambda * options.lambda_up, options.max_lambda);
    }
  }
  // Near the optimum the cost stops resolving progress along weakly constrained
  // directions (the change falls below its evaluation roundoff) and damping keeps
  // rising. Finish with a few undamped Gauss-Newton steps while the quadratic
  // model says the remaining decrease is below that resolution.
  if (s.status == LmStatus::Converged && options.polish_steps > 0) {
    for (int k = 0; k < options.polish_steps; ++k) {
      const double resolution = options.cost_resolution * std::max(sys.cost, 1.0);
      if (!chol.factorize(sys.hessian)) break;
      const Eigen::VectorXd delta = chol.solve(-sys.gradient);
      const double predicted = -sys.gradient.dot(delta);
      if (!delta.allFinite() || predicted > resolution || delta.lpNorm<Eigen::Infinity>() == 0.0) break;
      const Values candidate = retract_all(result.values, ordering, delta);
      const double new_cost = graph.total_cost(candidate);
      if (!std::isfinite(new_cost) || new_cost > sys.cost + resolution) break;
      result.values = candidate;
      structure.linearize(graph, result.values, sys);
      s.cost_history.push_back(sys.cost);
      ++s.polish_steps;
    }
  }

  s.final_cost = sys.cost;
  s.final_lambda = lambda;
  s.gradient_norm = sys.gradient.lpNorm<Eigen::Infinity>();
  if (!std::isfinite(s.final_cost)) s.status = LmStatus::NonFiniteCost;

  if (options.compute_marginals && !s.failed()) {
    if (chol.factorize(sys.hessian)) {
      for (const auto& key : ordering.keys()) {
        const int o = ordering.offset(key);
        const int d = tangent_dim(key.kind);
        Eigen::VectorXd diag(d);
        for (int i = 0; i < d; ++i) {
          Eigen::VectorXd e = Eigen::VectorXd::Zero(ordering.dim());
          e(o + i) = 1.0;
          diag(i) = chol.solve(e)(o + i);
        }
        result.marginal_diagonals[key] = diag;
      }
    }
  }
  return result;
}

}  // namespace homing
