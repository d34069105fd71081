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

/// \file l1min.hpp
/// Range-weighted L1-minimal decomposition over a finite measurement
/// dictionary: min sum r_i |f_i| subject to C*I + sum f_i M_i = target,
/// solved as an equality-form LP with split variables f = f+ - f-.
/// Each Hermitian matrix equality is one real row per independent
/// degree of freedom: D diagonal entries, then the upper triangle's
/// real and imaginary parts.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/measurement.hpp"
#include "demesst/simplex.hpp"

namespace demesst {

inline constexpr std::size_t kDictionaryCap = 4096;

namespace detail {

/// Stacks a Hermitian matrix into the real row basis used by the LP.
inline Eigen::VectorXd hermitian_rows(const Matrix& h) {
  Eigen::Index d = h.rows();
  Eigen::VectorXd v(d * d);
  Eigen::Index at = 0;
  for (Eigen::Index i = 0; i < d; ++i) v(at++) = h(i, i).real();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) v(at++) = h(i, j).real();
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = i + 1; j < d; ++j) v(at++) = h(i, j).imag();
  return v;
}

}  // namespace detail

/// Minimal-cost decomposition of `o` over the atoms of a finite
/// family. Throws infeasible_error when the target lies outside
/// span{I, M_1, ..., M_K}.
inline Decomposition l1_min_decompose(const DenseOperator& o,
                                      const MeasurementFamily& family,
                                      double tol = 1e-8,
                                      std::string target_id = std::string(),
                                      std::size_t dictionary_cap =
                                          kDictionaryCap) {
  if (!o.is_hermitian())
    throw validation_error("l1_min_decompose: target must be Hermitian");
  if (family.kind() != MeasurementFamily::Kind::finite)
    throw validation_error("l1_min_decompose: family must be finite");
  if (family.size() > dictionary_cap)
    throw validation_error("l1_min_decompose: dictionary exceeds cap of " +
                           std::to_string(dictionary_cap));
  if (family.hilbert().dimension() != o.dim())
    throw validation_error("l1_min_decompose: dimension mismatch");

  std::vector<MeasurementRef> refs = family.entries();
  std::size_t n_atoms = refs.size();
  Eigen::Index d = o.dim();
  Eigen::Index rows = d * d;

  // Columns: f+ and f- per atom, then C+ and C-.
  Eigen::MatrixXd a(rows, 2 * n_atoms + 2);
  Eigen::VectorXd cost(2 * n_atoms + 2);
  std::vector<MeasurementPtr> atoms(n_atoms);
  Eigen::MatrixXd span(rows, n_atoms + 1);
  for (std::size_t i = 0; i < n_atoms; ++i) {
    atoms[i] = refs[i].get();
    if (atoms[i]->dim() != d)
      throw validation_error("dictionary atom dimension mismatch");
    Eigen::VectorXd col = detail::hermitian_rows(atoms[i]->observable().mat());
    a.col(2 * i) = col;
    a.col(2 * i + 1) = -col;
    cost(2 * i) = atoms[i]->range();
    cost(2 * i + 1) = atoms[i]->range();
    span.col(static_cast<Eigen::Index>(i)) = col;
  }
  Eigen::VectorXd id_col =
      detail::hermitian_rows(Matrix::Identity(d, d));
  a.col(2 * n_atoms) = id_col;
  a.col(2 * n_atoms + 1) = -id_col;
  cost(2 * n_atoms) = 0.0;
  cost(2 * n_atoms + 1) = 0.0;
  span.col(static_cast<Eigen::Index>(n_atoms)) = id_col;
  Eigen::VectorXd b = detail::hermitian_rows(o.mat());

  // Typed infeasibility: the target must lie in the dictionary span.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(span);
  qr.setThreshold(1e-10);
  Eigen::Index span_rank = qr.rank();
  Eigen::MatrixXd augmented(rows, span.cols() + 1);
  augmented.leftCols(span.cols()) = span;
  augmented.col(span.cols()) = b;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(augmented);
  qr2.setThreshold(1e-10);
  if (qr2.rank() > span_rank)
    throw infeasible_error(
        "target operator lies outside the dictionary span");

  LpSolution sol = solve_equality_lp(a, b, cost);

  std::vector<DecompTerm> terms;
  for (std::size_t i = 0; i < n_atoms; ++i) {
    double f = sol.x(2 * i) - sol.x(2 * i + 1);
    if (std::abs(f) < 1e-12) continue;
    terms.push_back(DecompTerm{MeasurementRef(atoms[i]), f});
  }
  double constant = sol.x(2 * n_atoms) - sol.x(2 * n_atoms + 1);
  if (std::abs(constant) < 1e-12) constant = 0.0;
  if (target_id.empty())
    target_id = "l1:" + hex16(fnv1a64_matrix(o.mat()));
  Decomposition out(std::move(target_id), constant, std::move(terms),
                    std::max(tol, 1e-10));
  // The simplex solves the equalities to pivot precision; verify.
  double residual =
      (out.reconstructed(static_cast<int>(d)).mat() - o.mat())
          .cwiseAbs()
          .maxCoeff();
  if (residual > std::max(tol, 1e-8))
    throw validation_error("lp reconstruction residual " +
                           std::to_string(residual) + " exceeds tolerance");
  return out;
}

}  // namespace demesst
