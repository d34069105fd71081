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

/// \file stabilizer.hpp
/// Stabilizer groups over the bit-packed Pauli algebra: generator
/// validation (Hermitian, commuting, independent), exact enumeration of
/// all 2^n group elements with phases, and dense state extraction for
/// full-rank groups.

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/pauli.hpp"

namespace demesst {

class StabilizerGroup {
 public:
  explicit StabilizerGroup(std::vector<PauliString> generators)
      : gens_(std::move(generators)) {
    if (gens_.empty()) throw validation_error("stabilizer: no generators");
    m_ = gens_[0].qubits();
    for (const auto& g : gens_) {
      if (g.qubits() != m_)
        throw validation_error("stabilizer: mixed qubit counts");
      if (!g.is_hermitian())
        throw validation_error("stabilizer generator not Hermitian: " +
                               g.to_string());
    }
    for (std::size_t i = 0; i < gens_.size(); ++i)
      for (std::size_t j = i + 1; j < gens_.size(); ++j)
        if (!gens_[i].commutes_with(gens_[j]))
          throw validation_error("stabilizer generators do not commute: " +
                                 gens_[i].to_string() + ", " +
                                 gens_[j].to_string());
    if (symplectic_rank() != static_cast<int>(gens_.size()))
      throw validation_error("stabilizer generators not independent");
    enumerate();
  }

  int qubits() const { return m_; }
  int generator_count() const { return static_cast<int>(gens_.size()); }
  bool full_rank() const { return generator_count() == m_; }
  const std::vector<PauliString>& generators() const { return gens_; }
  /// All 2^n products of generators, identity first.
  const std::vector<PauliString>& elements() const { return elements_; }

  /// Phase exponent w such that the group contains i^w (XZ-form of
  /// x,z); returns -1 when the letters are not in the group.
  int element_phase(std::uint32_t x, std::uint32_t z) const {
    auto it = phase_by_letters_.find(key(x, z));
    return it == phase_by_letters_.end() ? -1 : it->second;
  }

  bool contains_letters(std::uint32_t x, std::uint32_t z) const {
    return phase_by_letters_.count(key(x, z)) != 0;
  }

  /// Dense stabilized state for a full-rank group: the rank-1 projector
  /// 2^{-m} sum_s s is assembled column by column until a nonzero one
  /// appears; the global phase is fixed by making the first nonzero
  /// amplitude real positive.
  PureState state_vector() const {
    if (!full_rank())
      throw validation_error("state_vector requires a full-rank group");
    int d = 1 << m_;
    double scale = 1.0 / static_cast<double>(elements_.size());
    for (int col = 0; col < d; ++col) {
      Vector v = Vector::Zero(d);
      Vector e = Vector::Zero(d);
      e(col) = 1.0;
      for (const auto& s : elements_) v += s.apply(e);
      v *= scale;
      double n = v.norm();
      if (n > 1e-9) {
        v /= n;
        for (int i = 0; i < d; ++i) {
          if (std::abs(v(i)) > 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            break;
          }
        }
        return PureState(std::move(v));
      }
    }
    throw std::runtime_error("stabilizer projector is zero");  // unreachable
  }

  /// Projector 2^{-m} sum_s s as a dense matrix (full-rank groups give
  /// rank 1; smaller groups a higher-rank projector).
  DenseOperator projector() const {
    int d = 1 << m_;
    Matrix acc = Matrix::Zero(d, d);
    for (const auto& s : elements_) acc += s.dense().mat();
    acc /= static_cast<double>(elements_.size());
    return DenseOperator(std::move(acc));
  }

 private:
  static std::uint64_t key(std::uint32_t x, std::uint32_t z) {
    return (static_cast<std::uint64_t>(x) << 32) | z;
  }

  int symplectic_rank() const {
    // Gaussian elimination over GF(2) on the (x|z) rows.
    std::vector<std::uint64_t> rows;
    rows.reserve(gens_.size());
    for (const auto& g : gens_)
      rows.push_back((static_cast<std::uint64_t>(g.x_bits()) << 32) |
                     g.z_bits());
    int rank = 0;
    for (int bit = 63; bit >= 0 && rank < static_cast<int>(rows.size());
         --bit) {
      std::uint64_t mask = 1ull << bit;
      int pivot = -1;
      for (int r = rank; r < static_cast<int>(rows.size()); ++r)
        if (rows[r] & mask) {
          pivot = r;
          break;
        }
      if (pivot < 0) continue;
      std::swap(rows[rank], rows[pivot]);
      for (int r = 0; r < static_cast<int>(rows.size()); ++r)
        if (r != rank && (rows[r] & mask)) rows[r] ^= rows[rank];
      ++rank;
    }
    return rank;
  }

  void enumerate() {
    int n = generator_count();
    elements_.reserve(1u << n);
    elements_.emplace_back(m_);  // identity
    phase_by_letters_.emplace(key(0, 0), 0);
    for (int g = 0; g < n; ++g) {
      std::size_t prev = elements_.size();
      for (std::size_t i = 0; i < prev; ++i) {
        PauliString p = pauli_mul(gens_[g], elements_[i]);
        phase_by_letters_.emplace(key(p.x_bits(), p.z_bits()), p.phase_w());
        elements_.push_back(std::move(p));
      }
    }
  }

  std::vector<PauliString> gens_;
  int m_;
  std::vector<PauliString> elements_;
  std::unordered_map<std::uint64_t, int> phase_by_letters_;
};

}  // namespace demesst
