// Copyright 2026 The demesst developers
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

/// \file simplex.hpp
/// Dense two-phase simplex for small equality-form linear programs:
/// min c'x subject to A x = b, x >= 0. Redundant equality rows are
/// removed by Gaussian pre-reduction (with a consistency check), and
/// Dantzig pricing falls back to Bland's rule after a run of degenerate
/// pivots so cycling cannot occur.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "demesst/core.hpp"

namespace demesst {

struct LpSolution {
  Eigen::VectorXd x;
  double objective = 0.0;
};

namespace detail {

/// Row-reduces [A | b] in place, returning the surviving row indices.
/// A row that vanishes on the A side but not on b makes the system
/// inconsistent.
inline std::vector<Eigen::Index> reduce_equalities(Eigen::MatrixXd& a,
                                                   Eigen::VectorXd& b,
                                                   double tol) {
  Eigen::Index rows = a.rows(), cols = a.cols();
  std::vector<Eigen::Index> kept;
  Eigen::Index r = 0;
  for (Eigen::Index c = 0; c < cols && r < rows; ++c) {
    Eigen::Index piv = r;
    double best = std::abs(a(r, c));
    for (Eigen::Index i = r + 1; i < rows; ++i) {
      if (std::abs(a(i, c)) > best) {
        best = std::abs(a(i, c));
        piv = i;
      }
    }
    if (best <= tol) continue;
    a.row(r).swap(a.row(piv));
    std::swap(b(r), b(piv));
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (i == r || std::abs(a(i, c)) <= 0.0) continue;
      double factor = a(i, c) / a(r, c);
      a.row(i) -= factor * a.row(r);
      b(i) -= factor * b(r);
    }
    kept.push_back(r);
    ++r;
  }
  for (Eigen::Index i = r; i < rows; ++i) {
    if (std::abs(b(i)) > tol * std::max(1.0, b.cwiseAbs().maxCoeff()))
      throw infeasible_error("equality constraints are inconsistent");
  }
  return kept;
}

/// One simplex phase on the tableau (basis columns already identity).
/// Returns false when the objective is unbounded below.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<Eigen::Index> basis,
          double pivot_tol)
      : t_(std::move(t)), basis_(std::move(basis)), pivot_tol_(pivot_tol) {}

  /// Minimizes c over the current feasible basis; reduced costs are
  /// maintained in an extra bottom row.
  bool run(const Eigen::VectorXd& c, int max_iters) {
    Eigen::Index m = t_.rows(), n = t_.cols() - 1;
    cost_ = Eigen::VectorXd::Zero(n + 1);
    cost_.head(n) = c;
    for (Eigen::Index i = 0; i < m; ++i)
      cost_ -= c(basis_[i]) * t_.row(i).transpose();
    int degenerate_run = 0;
    for (int iter = 0; iter < max_iters; ++iter) {
      bool bland = degenerate_run > 50;
      Eigen::Index enter = -1;
      if (bland) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (cost_(j) < -pivot_tol_) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -pivot_tol_;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (cost_(j) < best) {
            best = cost_(j);
            enter = j;
          }
        }
      }
      if (enter < 0) return true;  // optimal
      Eigen::Index leave = -1;
      double best_ratio = 0.0, best_pivot = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        double aij = t_(i, enter);
        if (aij <= pivot_tol_) continue;
        double ratio = t_(i, n) / aij;
        bool take = false;
        if (leave < 0) {
          take = true;
        } else if (ratio < best_ratio - 1e-12) {
          take = true;
        } else if (ratio <= best_ratio + 1e-12) {
          // Tie: Bland picks the lowest basis index, Dantzig the
          // largest pivot for numerical stability.
          take = bland ? basis_[i] < basis_[leave] : aij > best_pivot;
        }
        if (take) {
          leave = i;
          best_ratio = ratio;
          best_pivot = aij;
        }
      }
      if (leave < 0) return false;  // unbounded
      degenerate_run = (best_ratio <= 1e-12) ? degenerate_run + 1 : 0;
      pivot(leave, enter);
    }
    throw validation_error("simplex did not converge within the iteration "
                           "cap");
  }

  const Eigen::MatrixXd& tableau() const { return t_; }
  const std::vector<Eigen::Index>& basis() const { return basis_; }
  double objective_of(const Eigen::VectorXd& c) const {
    double v = 0.0;
    Eigen::Index n = t_.cols() - 1;
    for (Eigen::Index i = 0; i < t_.rows(); ++i)
      v += c(basis_[i]) * t_(i, n);
    return v;
  }
  Eigen::VectorXd solution(Eigen::Index n_vars) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_vars);
    Eigen::Index n = t_.cols() - 1;
    for (Eigen::Index i = 0; i < t_.rows(); ++i)
      if (basis_[i] < n_vars) x(basis_[i]) = t_(i, n);
    return x;
  }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == row) continue;
      double f = t_(i, col);
      if (f != 0.0) t_.row(i) -= f * t_.row(row);
    }
    cost_ -= cost_(col) * t_.row(row).transpose();
    basis_[row] = col;
  }

 private:
  Eigen::MatrixXd t_;
  std::vector<Eigen::Index> basis_;
  Eigen::VectorXd cost_;
  double pivot_tol_;
};

}  // namespace detail

/// Solves min c'x, A x = b, x >= 0. Throws infeasible_error when no
/// feasible point exists and validation_error on solver failure.
inline LpSolution solve_equality_lp(Eigen::MatrixXd a, Eigen::VectorXd b,
                                    const Eigen::VectorXd& c,
                                    double pivot_tol = 1e-9,
                                    int max_iters = 20000) {
  if (a.rows() != b.size() || a.cols() != c.size())
    throw validation_error("lp dimensions disagree");
  std::vector<Eigen::Index> kept = detail::reduce_equalities(a, b, 1e-10);
  Eigen::Index m = static_cast<Eigen::Index>(kept.size());
  Eigen::Index n = a.cols();
  Eigen::MatrixXd a2(m, n);
  Eigen::VectorXd b2(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a2.row(i) = a.row(kept[i]);
    b2(i) = b(kept[i]);
  }
  for (Eigen::Index i = 0; i < m; ++i) {
    if (b2(i) < 0.0) {
      a2.row(i) = -a2.row(i);
      b2(i) = -b2(i);
    }
  }

  // Phase 1: artificial basis.
  Eigen::MatrixXd t1(m, n + m + 1);
  t1.block(0, 0, m, n) = a2;
  t1.block(0, n, m, m) = Eigen::MatrixXd::Identity(m, m);
  t1.col(n + m) = b2;
  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;
  Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n + m);
  c1.tail(m).setOnes();
  detail::Tableau phase1(std::move(t1), std::move(basis), pivot_tol);
  if (!phase1.run(c1, max_iters))
    throw validation_error("phase-1 lp unbounded (internal error)");
  double infeas = phase1.objective_of(c1);
  double b_scale = m > 0 ? b2.cwiseAbs().maxCoeff() : 0.0;
  if (infeas > 1e-7 * std::max(1.0, b_scale))
    throw infeasible_error("no feasible point for the lp constraints");

  // Build phase 2 from the final phase-1 tableau, dropping artificial
  // columns. Artificial variables still basic sit at zero; pivot them
  // out where possible and drop dependent rows otherwise.
  Eigen::MatrixXd t = phase1.tableau();
  std::vector<Eigen::Index> bas = phase1.basis();
  std::vector<Eigen::Index> keep_rows;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (bas[i] < n) {
      keep_rows.push_back(i);
      continue;
    }
    Eigen::Index piv = -1;
    double best = pivot_tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > best) {
        best = std::abs(t(i, j));
        piv = j;
      }
    }
    if (piv < 0) continue;  // redundant row
    // Manual pivot on the raw tableau.
    t.row(i) /= t(i, piv);
    for (Eigen::Index r = 0; r < m; ++r) {
      if (r == i) continue;
      double f = t(r, piv);
      if (f != 0.0) t.row(r) -= f * t.row(i);
    }
    bas[i] = piv;
    keep_rows.push_back(i);
  }
  Eigen::Index m2 = static_cast<Eigen::Index>(keep_rows.size());
  Eigen::MatrixXd t2(m2, n + 1);
  std::vector<Eigen::Index> basis2(m2);
  for (Eigen::Index i = 0; i < m2; ++i) {
    t2.block(i, 0, 1, n) = t.block(keep_rows[i], 0, 1, n);
    t2(i, n) = t(keep_rows[i], n + m);
    basis2[i] = bas[keep_rows[i]];
  }
  detail::Tableau phase2(std::move(t2), std::move(basis2), pivot_tol);
  if (!phase2.run(c, max_iters))
    throw validation_error("lp objective is unbounded below");
  LpSolution out;
  out.x = phase2.solution(n);
  out.objective = phase2.objective_of(c);
  return out;
}

}  // namespace demesst
