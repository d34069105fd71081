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

/// \file hadamard.hpp
/// Ancilla-assisted measurement expansion. A register of ancillae in
/// |+>, one controlled unitary each, and a post-selected X-basis ancilla
/// readout turn a base measurement into an effective system-space
/// measurement whose observable picks out interference terms such as
/// Re<U_a^dag O U_b>. Ancillae are integrated out analytically: the
/// sign-s branch acts as the Kraus map A = prod (U_i + s_i I)/2, so the
/// expanded effects are A^dag Lambda_j A (values scaled by 2^n) plus a
/// value-0 completion effect I - A^dag A.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/measurement.hpp"

namespace demesst {
namespace detail {

inline void check_unitary(const Matrix& u, const char* what) {
  if (u.rows() != u.cols()) throw validation_error(std::string(what) +
                                                   " must be square");
  Matrix gram = u.adjoint() * u;
  double dev =
      (gram - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (dev > 1e-10)
    throw validation_error(std::string(what) +
                           " is not unitary (deviation " +
                           std::to_string(dev) + ")");
}

}  // namespace detail

/// Same outcome values read after the unitary change of frame V: the
/// effects become V^dag Lambda_j V, so expectations on |psi> equal the
/// base expectations on V|psi>.
inline MeasurementPtr conjugate_measurement(const MeasurementPtr& base,
                                            const Matrix& v) {
  detail::check_unitary(v, "frame unitary");
  if (v.rows() != base->dim())
    throw validation_error("frame unitary dimension mismatch");
  std::vector<DenseOperator> effects;
  effects.reserve(base->effects().size());
  for (const DenseOperator& e : base->effects())
    effects.emplace_back(Matrix(v.adjoint() * e.mat() * v));
  std::uint64_t h = fnv1a64_matrix(v);
  return std::make_shared<MeasurementOperator>(
      "cj[" + base->id() + "]:" + hex16(h), std::move(effects),
      base->values(), RealizationTag::custom);
}

/// Expands `base` by |controls| ancilla-driven unitaries post-selected
/// on the given X-basis sign branch. The returned measurement lives on
/// the system space; its observable is V^dag (base observable) V with
/// V = prod (U_i + s_i I)/sqrt(2), and a value-0 effect absorbs the
/// discarded branches. Empty controls return `base` unchanged.
inline MeasurementPtr hadamard_expand(const MeasurementPtr& base,
                                      const std::vector<Matrix>& controls,
                                      const std::vector<int>& branch_signs) {
  if (controls.size() != branch_signs.size())
    throw validation_error("one branch sign per control required");
  if (controls.empty()) return base;
  int d = base->dim();
  Matrix a = Matrix::Identity(d, d);
  std::uint64_t h = 1469598103934665603ULL;
  for (std::size_t i = 0; i < controls.size(); ++i) {
    if (branch_signs[i] != 1 && branch_signs[i] != -1)
      throw validation_error("branch signs must be +-1");
    detail::check_unitary(controls[i], "control unitary");
    if (controls[i].rows() != d)
      throw validation_error("control unitary dimension mismatch");
    double s = static_cast<double>(branch_signs[i]);
    a = (0.5 * (controls[i] + s * Matrix::Identity(d, d)) * a).eval();
    h = fnv1a64_matrix(controls[i], h);
    h = fnv1a64_bytes(h, &branch_signs[i], sizeof(branch_signs[i]));
  }
  double scale = std::pow(2.0, static_cast<double>(controls.size()));
  std::vector<DenseOperator> effects;
  std::vector<double> values;
  effects.reserve(base->effects().size() + 1);
  values.reserve(base->values().size() + 1);
  for (std::size_t j = 0; j < base->effects().size(); ++j) {
    effects.emplace_back(Matrix(a.adjoint() * base->effects()[j].mat() * a));
    values.push_back(scale * base->values()[j]);
  }
  effects.emplace_back(Matrix(Matrix::Identity(d, d) - a.adjoint() * a));
  values.push_back(0.0);
  return std::make_shared<MeasurementOperator>(
      "hx[" + base->id() + "]:" + hex16(h), std::move(effects),
      std::move(values), RealizationTag::hadamard_expanded);
}

}  // namespace demesst
