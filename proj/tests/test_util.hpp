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

/// \file test_util.hpp
/// Small fixtures shared by the unit suites: single-qubit operators,
/// common states, and matrix comparison helpers.

#include <cmath>
#include <complex>
#include <random>

#include "demesst/core.hpp"

inline demesst::DenseOperator test_pauli_x() {
  demesst::Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return demesst::DenseOperator(m);
}

inline demesst::DenseOperator test_pauli_y() {
  demesst::Matrix m(2, 2);
  m << demesst::Complex(0, 0), demesst::Complex(0, -1),
      demesst::Complex(0, 1), demesst::Complex(0, 0);
  return demesst::DenseOperator(m);
}

inline demesst::DenseOperator test_pauli_z() {
  demesst::Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return demesst::DenseOperator(m);
}

inline demesst::PureState test_ket(int dim, int index) {
  return demesst::PureState::basis_state(dim, index);
}

/// +1 eigenprojector of (X+Y+Z)/sqrt(3).
inline demesst::DenseOperator test_magic_projector() {
  double s = 1.0 / std::sqrt(3.0);
  demesst::Matrix m =
      0.5 * (demesst::Matrix::Identity(2, 2) +
             s * (test_pauli_x().mat() + test_pauli_y().mat() +
                  test_pauli_z().mat()));
  return demesst::DenseOperator(m);
}

inline bool approx_equal(const demesst::DenseOperator& a,
                         const demesst::DenseOperator& b,
                         double tol = 1e-12) {
  return a.dim() == b.dim() &&
         (a.mat() - b.mat()).cwiseAbs().maxCoeff() <= tol;
}

/// W state (|100> + |010> + |001>)/sqrt(3) on three qubits.
inline demesst::PureState test_w_state() {
  demesst::Vector v = demesst::Vector::Zero(8);
  double s = 1.0 / std::sqrt(3.0);
  v(4) = s;  // |100>
  v(2) = s;  // |010>
  v(1) = s;  // |001>
  return demesst::PureState(std::move(v));
}

/// Deterministic pseudo-random complex Gaussian matrix.
inline demesst::Matrix test_random_gaussian(int rows, int cols,
                                            std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  demesst::Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = demesst::Complex(g(rng), g(rng));
  return m;
}

/// Haar-ish random unitary via QR with phase fixing.
inline demesst::Matrix test_random_unitary(int dim, std::mt19937_64& rng) {
  demesst::Matrix a = test_random_gaussian(dim, dim, rng);
  Eigen::HouseholderQR<demesst::Matrix> qr(a);
  demesst::Matrix q = qr.householderQ();
  demesst::Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    demesst::Complex d = r(i, i);
    q.col(i) *= (std::abs(d) > 0) ? d / std::abs(d) : demesst::Complex(1, 0);
  }
  return q;
}

inline demesst::DenseOperator test_random_hermitian(int dim,
                                                    std::mt19937_64& rng) {
  demesst::Matrix a = test_random_gaussian(dim, dim, rng);
  return demesst::DenseOperator(demesst::Matrix(0.5 * (a + a.adjoint())));
}

inline demesst::PureState test_random_state(int dim, std::mt19937_64& rng) {
  return demesst::PureState(demesst::Vector(
      test_random_gaussian(dim, 1, rng).col(0)));
}

/// <psi|O|psi> for a dense observable.
inline double test_expectation(const demesst::DenseOperator& o,
                               const demesst::PureState& psi) {
  return (psi.amplitudes().adjoint() * o.mat() * psi.amplitudes())(0, 0)
      .real();
}
