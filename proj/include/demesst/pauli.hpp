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

/// \file pauli.hpp
/// Bit-packed Pauli strings with exact integer phase tracking.
///
/// A string is stored as P = i^w (X^{x_0}Z^{z_0}) ox ... with w an
/// integer mod 4, so products, adjoints and hermiticity tests never
/// touch floating point. Bit q of `x_bits`/`z_bits` corresponds to the
/// basis-index bit of qubit q, i.e. qubit 0 is the leftmost string
/// character and the most significant index bit.

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "demesst/core.hpp"

namespace demesst {

class PauliString {
 public:
  /// Identity string on m qubits.
  explicit PauliString(int m) : m_(m), x_(0), z_(0), w_(0) { check_m(m); }

  PauliString(int m, std::uint32_t x_bits, std::uint32_t z_bits, int phase_w)
      : m_(m), x_(x_bits), z_(z_bits), w_(((phase_w % 4) + 4) % 4) {
    check_m(m);
    std::uint32_t mask = (m == 32) ? ~0u : ((1u << m) - 1);
    if ((x_ & ~mask) || (z_ & ~mask))
      throw validation_error("pauli bits exceed qubit count");
  }

  /// Parses e.g. "XIZ", "-Y", "iXZ", "-iZZ". Y contributes a factor i
  /// to the internal XZ-form phase.
  static PauliString from_string(const std::string& s) {
    std::size_t pos = 0;
    int w = 0;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      if (s[pos] == '-') w += 2;
      ++pos;
    }
    if (pos < s.size() && s[pos] == 'i') {
      w += 1;
      ++pos;
    }
    std::string letters = s.substr(pos);
    if (letters.empty()) throw validation_error("empty pauli string");
    int m = static_cast<int>(letters.size());
    std::uint32_t x = 0, z = 0;
    for (int q = 0; q < m; ++q) {
      std::uint32_t bit = 1u << (m - 1 - q);
      switch (letters[q]) {
        case 'I': break;
        case 'X': x |= bit; break;
        case 'Y': x |= bit; z |= bit; w += 1; break;
        case 'Z': z |= bit; break;
        default:
          throw validation_error("invalid pauli letter in: " + s);
      }
    }
    return PauliString(m, x, z, w);
  }

  /// Canonical Hermitian representative of the (x, z) class: phase
  /// chosen so the matrix realization has eigenvalues +-1 and letters
  /// read as plain I/X/Y/Z.
  static PauliString hermitian(int m, std::uint32_t x_bits,
                               std::uint32_t z_bits) {
    return PauliString(m, x_bits, z_bits,
                       std::popcount(x_bits & z_bits) % 4);
  }

  int qubits() const { return m_; }
  std::uint32_t x_bits() const { return x_; }
  std::uint32_t z_bits() const { return z_; }
  /// Phase exponent: the matrix realization is i^w (XZ-form).
  int phase_w() const { return w_; }

  bool same_letters(const PauliString& o) const {
    return m_ == o.m_ && x_ == o.x_ && z_ == o.z_;
  }
  bool operator==(const PauliString& o) const {
    return same_letters(o) && w_ == o.w_;
  }

  bool is_identity_letters() const { return x_ == 0 && z_ == 0; }

  /// Hermitian iff w = popcount(x & z) mod 2.
  bool is_hermitian() const {
    return ((w_ - std::popcount(x_ & z_)) % 2) == 0;
  }

  /// Exact product: phases compose as w = w1 + w2 + 2 (z1 . x2) mod 4,
  /// from commuting Z^{z1} past X^{x2}.
  friend PauliString pauli_mul(const PauliString& p, const PauliString& q) {
    if (p.m_ != q.m_) throw validation_error("pauli_mul: qubit mismatch");
    int w = p.w_ + q.w_ + 2 * std::popcount(p.z_ & q.x_);
    return PauliString(p.m_, p.x_ ^ q.x_, p.z_ ^ q.z_, w);
  }

  PauliString adjoint() const {
    // (i^w X^x Z^z)^dag = i^{-w} (-1)^{x.z} X^x Z^z
    return PauliString(m_, x_, z_, -w_ + 2 * std::popcount(x_ & z_));
  }

  bool commutes_with(const PauliString& o) const {
    return ((std::popcount(x_ & o.z_) + std::popcount(z_ & o.x_)) % 2) == 0;
  }

  /// Display form with Y letters, e.g. "-iXY". The prefix absorbs the
  /// difference between the XZ-form phase and one factor i per Y.
  std::string to_string() const {
    int disp = ((w_ - std::popcount(x_ & z_)) % 4 + 4) % 4;
    static const char* prefixes[4] = {"", "i", "-", "-i"};
    std::string out = prefixes[disp];
    for (int q = 0; q < m_; ++q) {
      std::uint32_t bit = 1u << (m_ - 1 - q);
      bool xb = x_ & bit, zb = z_ & bit;
      out += xb ? (zb ? 'Y' : 'X') : (zb ? 'Z' : 'I');
    }
    return out;
  }

  /// Dense realization. Each column j holds the single entry
  /// i^w (-1)^{popcount(z & j)} at row j ^ x.
  DenseOperator dense() const {
    int d = 1 << m_;
    Matrix out = Matrix::Zero(d, d);
    Complex phase = phase_factor();
    for (int j = 0; j < d; ++j) {
      double sign =
          (std::popcount(z_ & static_cast<std::uint32_t>(j)) % 2) ? -1.0
                                                                  : 1.0;
      out(j ^ static_cast<int>(x_), j) = phase * sign;
    }
    return DenseOperator(std::move(out));
  }

  Vector apply(const Vector& v) const {
    int d = 1 << m_;
    if (v.size() != d) throw validation_error("pauli apply: dim mismatch");
    Vector out(d);
    Complex phase = phase_factor();
    for (int j = 0; j < d; ++j) {
      double sign =
          (std::popcount(z_ & static_cast<std::uint32_t>(j)) % 2) ? -1.0
                                                                  : 1.0;
      out(j ^ static_cast<int>(x_)) = phase * sign * v(j);
    }
    return out;
  }

  /// tr(P o) in O(D): P has one nonzero per column.
  Complex trace_with(const DenseOperator& o) const {
    int d = 1 << m_;
    if (o.dim() != d) throw validation_error("trace_with: dim mismatch");
    Complex phase = phase_factor();
    Complex acc = 0.0;
    for (int j = 0; j < d; ++j) {
      double sign =
          (std::popcount(z_ & static_cast<std::uint32_t>(j)) % 2) ? -1.0
                                                                  : 1.0;
      acc += phase * sign * o.mat()(j, j ^ static_cast<int>(x_));
    }
    return acc;
  }

  /// Enumeration order used by the Pauli measurement family: index in
  /// [1, 4^m - 1], base-4 digits from qubit 0 (most significant digit),
  /// digit mapping 0=I, 1=X, 2=Y, 3=Z.
  static PauliString from_family_index(int m, long long index) {
    check_m(m);
    std::uint32_t x = 0, z = 0;
    long long rest = index;
    for (int q = m - 1; q >= 0; --q) {
      int digit = static_cast<int>(rest % 4);
      rest /= 4;
      std::uint32_t bit = 1u << (m - 1 - q);
      if (digit == 1 || digit == 2) x |= bit;
      if (digit == 2 || digit == 3) z |= bit;
    }
    if (rest != 0) throw validation_error("pauli family index out of range");
    return hermitian(m, x, z);
  }

 private:
  static void check_m(int m) {
    if (m < 1 || m > 12)
      throw validation_error("pauli qubit count must be in [1, 12]");
  }

  Complex phase_factor() const {
    static const Complex table[4] = {
        {1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    return table[w_];
  }

  int m_;
  std::uint32_t x_, z_;
  int w_;
};

}  // namespace demesst
