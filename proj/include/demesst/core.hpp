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

/// \file core.hpp
/// Dense complex linear algebra over small finite-dimensional Hilbert
/// spaces: space descriptors, operators with cached hermiticity, pure
/// states, and the handful of primitives every other header builds on.

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

namespace demesst {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Raised when inputs violate a documented precondition.
class validation_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a target operator cannot be represented over the
/// requested dictionary (span failure), or an iteration oracle breaks
/// its contract.
class infeasible_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Desk-scale guard: dense storage beyond this dimension is a bug, not
/// a use case.
inline constexpr int kDimCap = 4096;

/// Absolute entrywise tolerance for treating a matrix as Hermitian.
inline constexpr double kHermTol = 1e-12;

/// Default relative eigenvalue cutoff for Gram-rank decisions.
inline constexpr double kGramRelTol = 1e-10;

/// Describes the tensor-factor structure of a Hilbert space: either m
/// qubits or a register of bosonic modes truncated at `cutoff` levels.
class HilbertSpec {
 public:
  enum class Kind { qubits, bosonic };

  static HilbertSpec qubits(int m) {
    if (m < 1) throw validation_error("qubit count must be >= 1");
    long long d = 1;
    for (int i = 0; i < m; ++i) d *= 2;
    check_cap(d);
    return HilbertSpec(Kind::qubits, m, 0, static_cast<int>(d));
  }

  static HilbertSpec bosonic(int modes, int cutoff) {
    if (modes < 1) throw validation_error("mode count must be >= 1");
    if (cutoff < 2) throw validation_error("fock cutoff must be >= 2");
    long long d = 1;
    for (int i = 0; i < modes; ++i) {
      d *= cutoff;
      check_cap(d);
    }
    return HilbertSpec(Kind::bosonic, modes, cutoff, static_cast<int>(d));
  }

  Kind kind() const { return kind_; }
  /// Qubit count or mode count, depending on kind.
  int sites() const { return sites_; }
  int cutoff() const { return cutoff_; }
  int dimension() const { return dim_; }

  bool operator==(const HilbertSpec& o) const {
    return kind_ == o.kind_ && sites_ == o.sites_ && cutoff_ == o.cutoff_;
  }

 private:
  HilbertSpec(Kind k, int sites, int cutoff, int dim)
      : kind_(k), sites_(sites), cutoff_(cutoff), dim_(dim) {}

  static void check_cap(long long d) {
    if (d > kDimCap)
      throw validation_error("dimension exceeds desk-scale cap of 4096");
  }

  Kind kind_;
  int sites_;
  int cutoff_;
  int dim_;
};

/// Dense complex operator with a hermiticity flag cached at
/// construction (max |A - A^dag| <= 1e-12 entrywise).
class DenseOperator {
 public:
  DenseOperator() = default;

  explicit DenseOperator(Matrix m) : mat_(std::move(m)) {
    if (mat_.rows() != mat_.cols())
      throw validation_error("operator matrix must be square");
    if (mat_.rows() > kDimCap)
      throw validation_error("dimension exceeds desk-scale cap of 4096");
    hermitian_ = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff() <= kHermTol;
  }

  static DenseOperator identity(int dim) {
    return DenseOperator(Matrix::Identity(dim, dim));
  }

  static DenseOperator zero(int dim) {
    return DenseOperator(Matrix::Zero(dim, dim));
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Matrix& mat() const { return mat_; }
  bool is_hermitian() const { return hermitian_; }

  Complex trace() const { return mat_.trace(); }
  double frobenius_norm() const { return mat_.norm(); }

 private:
  Matrix mat_;
  bool hermitian_ = false;
};

/// Pure state; `norm_record` preserves the pre-normalization length of
/// raw (not yet normalized) vectors so spanning-set bookkeeping stays
/// exact.
class PureState {
 public:
  PureState() = default;

  explicit PureState(Vector amps, bool normalize = true)
      : amps_(std::move(amps)) {
    if (amps_.size() > kDimCap)
      throw validation_error("dimension exceeds desk-scale cap of 4096");
    norm_record_ = amps_.norm();
    if (normalize && norm_record_ > 0.0) amps_ /= norm_record_;
  }

  static PureState basis_state(int dim, int index) {
    if (index < 0 || index >= dim)
      throw validation_error("basis index out of range");
    Vector v = Vector::Zero(dim);
    v(index) = 1.0;
    return PureState(std::move(v));
  }

  int dim() const { return static_cast<int>(amps_.size()); }
  const Vector& amplitudes() const { return amps_; }
  /// Length of the originally supplied vector (1 for normalized input).
  double norm_record() const { return norm_record_; }

  DenseOperator projector() const {
    return DenseOperator(amps_ * amps_.adjoint());
  }

 private:
  Vector amps_;
  double norm_record_ = 0.0;
};

/// Kronecker product; the hermiticity flag survives because the
/// product of Hermitian factors is Hermitian.
inline DenseOperator tensor_product(const DenseOperator& a,
                                    const DenseOperator& b) {
  long long d = static_cast<long long>(a.dim()) * b.dim();
  if (d > kDimCap)
    throw validation_error("tensor product exceeds desk-scale cap of 4096");
  Matrix out(d, d);
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j)
      out.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) =
          a.mat()(i, j) * b.mat();
  return DenseOperator(std::move(out));
}

inline Vector tensor_product(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    out.segment(i * b.size(), b.size()) = a(i) * b;
  return out;
}

/// Hilbert-Schmidt inner product tr(a^dag b).
inline Complex hs_inner(const DenseOperator& a, const DenseOperator& b) {
  if (a.dim() != b.dim())
    throw validation_error("hs_inner: dimension mismatch");
  return a.mat().conjugate().cwiseProduct(b.mat()).sum();
}

/// O - (tr O / D) I; requires a Hermitian input.
inline DenseOperator traceless_part(const DenseOperator& o) {
  if (!o.is_hermitian())
    throw validation_error("traceless_part: input must be Hermitian");
  Matrix m = o.mat();
  Complex shift = m.trace() / static_cast<double>(o.dim());
  m.diagonal().array() -= shift;
  return DenseOperator(std::move(m));
}

/// Spectral norm of the Moore-Penrose inverse of a PSD matrix:
/// 1 / (smallest eigenvalue above `tol`). Eigenvalues in [-tol, tol]
/// count as exact zeros; anything below -tol is an invalid input.
/// Passing tol < 0 selects the default 1e-10 * (largest eigenvalue).
inline double pseudoinverse_norm(const DenseOperator& g, double tol = -1.0) {
  if (!g.is_hermitian())
    throw validation_error("pseudoinverse_norm: input must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(g.mat());
  if (es.info() != Eigen::Success)
    throw std::runtime_error("pseudoinverse_norm: eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();  // ascending
  double lam_max = ev(ev.size() - 1);
  if (tol < 0.0) tol = kGramRelTol * std::max(lam_max, 0.0);
  if (ev(0) < -tol)
    throw validation_error("pseudoinverse_norm: negative eigenvalue " +
                           std::to_string(ev(0)));
  double smallest_retained = 0.0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) > tol) {
      smallest_retained = ev(i);
      break;
    }
  }
  if (smallest_retained == 0.0) return 0.0;  // zero matrix: G^+ = 0
  return 1.0 / smallest_retained;
}

/// FNV-1a 64-bit hash; used for stable content-derived identifiers.
inline std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t fnv1a64_bytes(std::uint64_t h, const void* data,
                                   std::size_t n) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

/// Bitwise hash of matrix entries in column order; identical doubles
/// give identical ids across runs.
inline std::uint64_t fnv1a64_matrix(const Matrix& m,
                                    std::uint64_t h = 1469598103934665603ull) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      double re = m(i, j).real(), im = m(i, j).imag();
      h = fnv1a64_bytes(h, &re, sizeof(re));
      h = fnv1a64_bytes(h, &im, sizeof(im));
    }
  }
  return h;
}

inline std::string hex16(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[v & 0xf];
    v >>= 4;
  }
  return out;
}

}  // namespace demesst
