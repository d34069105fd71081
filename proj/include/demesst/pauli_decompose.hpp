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

/// \file pauli_decompose.hpp
/// Expansion of a dense Hermitian qubit operator in the orthogonal
/// Pauli dictionary: C = tr(o)/2^m and f_P = tr(P o)/2^m, so all
/// range-2 terms give Z = 2 sum |f_P|.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/families.hpp"
#include "demesst/pauli.hpp"

namespace demesst {

inline constexpr double kAnalyticPruneTol = 1e-14;

inline Decomposition pauli_decompose(const DenseOperator& o, int m,
                                     std::string target_id = std::string(),
                                     double prune_tol = kAnalyticPruneTol) {
  if (m < 1 || m > 12)
    throw validation_error("pauli_decompose: m must be in [1, 12]");
  long long dim = 1ll << m;
  if (o.dim() != dim)
    throw validation_error("pauli_decompose: dimension mismatch");
  if (!o.is_hermitian())
    throw validation_error("pauli_decompose: target must be Hermitian");
  double inv_d = 1.0 / static_cast<double>(dim);
  double constant = o.trace().real() * inv_d;
  if (target_id.empty())
    target_id = "op:" + hex16(fnv1a64_matrix(o.mat()));
  std::vector<DecompTerm> terms;
  long long total = dim * dim;  // 4^m
  for (long long idx = 1; idx < total; ++idx) {
    PauliString p = PauliString::from_family_index(m, idx);
    double f = p.trace_with(o).real() * inv_d;
    if (std::abs(f) < prune_tol) continue;
    terms.push_back(DecompTerm{pauli_measurement_ref(p), f});
  }
  return Decomposition(std::move(target_id), constant, std::move(terms));
}

/// Closed forms used as cross-checks: the Pauli cost of an m-qubit
/// stabilizer projector and of the m-fold magic-projector product.
inline double stabilizer_projector_pauli_cost(int m) {
  return 2.0 - std::pow(2.0, 1.0 - m);
}

inline double magic_projector_pauli_cost(int m) {
  return std::pow(2.0, 1.0 - m) *
         (std::pow(1.0 + std::sqrt(3.0), static_cast<double>(m)) - 1.0);
}

}  // namespace demesst
