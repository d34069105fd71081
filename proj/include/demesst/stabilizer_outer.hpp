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

/// \file stabilizer_outer.hpp
/// Pauli decomposition of i^c P_left |psi><psi| P_right^dag + h.c. for
/// a stabilizer state |psi>, computed entirely in the symplectic
/// representation. Substituting |psi><psi| = 2^{-m} sum_{s in S} s
/// turns each group element into one Pauli term P_left s P_right^dag;
/// the Hermitian completion keeps the term iff its phase is even and
/// contributes +-2 times the canonical Hermitian Pauli with the same
/// letters. Identical letters merge; the identity goes to the constant.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/families.hpp"
#include "demesst/pauli.hpp"
#include "demesst/pauli_decompose.hpp"
#include "demesst/stabilizer.hpp"

namespace demesst {

inline Decomposition stabilizer_outer_decompose(
    const StabilizerGroup& group, const PauliString& p_left,
    const PauliString& p_right, int phase_c,
    std::string target_id = std::string()) {
  if (!group.full_rank())
    throw validation_error("outer decomposition needs a full-rank "
                           "stabilizer group");
  int m = group.qubits();
  if (p_left.qubits() != m || p_right.qubits() != m)
    throw validation_error("pauli operands do not match the group's qubit "
                           "count");
  if (phase_c != 0 && phase_c != 1)
    throw validation_error("phase selector must be 0 or 1");

  // Same-letter operands make i^c P psi P^dag + h.c. collapse to
  // (i^phi + i^-phi) P psi P^dag: zero when phi is odd, and a single
  // projector (up to sign) otherwise, so the sum below is halved.
  bool diagonal = p_left.same_letters(p_right);
  if (diagonal) {
    int phi = ((phase_c + p_left.phase_w() - p_right.phase_w()) % 4 + 4) % 4;
    if (phi % 2 == 1)
      throw validation_error("operator is identically zero (diagonal "
                             "element with odd phase)");
  }
  double scale = (diagonal ? 1.0 : 2.0) / std::pow(2.0, m);

  PauliString right_adj = p_right.adjoint();
  std::map<std::uint64_t, std::pair<PauliString, double>> acc;
  double constant = 0.0;
  for (const PauliString& s : group.elements()) {
    PauliString t = pauli_mul(pauli_mul(p_left, s), right_adj);
    int w_h = std::popcount(t.x_bits() & t.z_bits()) % 4;
    int phi = ((phase_c + t.phase_w() - w_h) % 4 + 4) % 4;
    if (phi % 2 == 1) continue;  // anti-Hermitian part cancels
    double coeff = (phi == 0 ? 1.0 : -1.0) * scale;
    if (t.is_identity_letters()) {
      constant += coeff;
      continue;
    }
    std::uint64_t key =
        (static_cast<std::uint64_t>(t.x_bits()) << 32) | t.z_bits();
    auto it = acc.find(key);
    if (it == acc.end()) {
      acc.emplace(key,
                  std::make_pair(PauliString::hermitian(m, t.x_bits(),
                                                        t.z_bits()),
                                 coeff));
    } else {
      it->second.second += coeff;
    }
  }

  std::vector<DecompTerm> terms;
  terms.reserve(acc.size());
  for (auto& [key, entry] : acc) {
    (void)key;
    if (std::abs(entry.second) < kAnalyticPruneTol) continue;
    terms.push_back(
        DecompTerm{pauli_measurement_ref(entry.first), entry.second});
  }
  if (terms.empty() && std::abs(constant) < kAnalyticPruneTol)
    throw validation_error("operator is identically zero");
  if (target_id.empty()) {
    target_id = "souter:" + p_left.to_string() + "," + p_right.to_string() +
                ",c=" + std::to_string(phase_c);
  }
  return Decomposition(std::move(target_id), constant, std::move(terms));
}

}  // namespace demesst
