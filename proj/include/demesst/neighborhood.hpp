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

/// \file neighborhood.hpp
/// Subspaces reachable from a base state by short generator words: the
/// span of g_w ... g_1 |psi> over all words of length <= k. Words are
/// enumerated breadth-first, numerically parallel images are merged
/// (children of a merged word are parallel to children of its
/// representative, so only representatives are expanded), and the
/// surviving raw vectors carry an explicit Gram matrix, a
/// rank-revealing orthonormalization, and the pseudoinverse norm that
/// controls superposition costs.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/pauli.hpp"

namespace demesst {

inline constexpr double kUnitaryCheckTol = 1e-10;
inline constexpr double kDefaultDedupTol = 1e-10;
inline constexpr double kZeroWordTol = 1e-12;
inline constexpr double kIdentityGramTol = 1e-12;

/// One neighborhood generator. A set Pauli word certifies that `op` is
/// that word's matrix, which unlocks symbolic element decompositions
/// downstream; it never changes the numerics here.
struct Generator {
  std::string label;
  DenseOperator op;
  bool is_unitary = false;
  std::optional<PauliString> pauli;
};

inline Generator unitary_generator(std::string label, DenseOperator op) {
  return Generator{std::move(label), std::move(op), true, std::nullopt};
}

inline Generator general_generator(std::string label, DenseOperator op) {
  return Generator{std::move(label), std::move(op), false, std::nullopt};
}

inline Generator pauli_generator(const PauliString& p) {
  return Generator{p.to_string(), p.dense(), true, p};
}

/// Validated collection of generators acting on one space.
class GeneratorSet {
 public:
  explicit GeneratorSet(std::vector<Generator> gens)
      : gens_(std::move(gens)) {
    for (const Generator& g : gens_) {
      if (g.op.dim() != gens_.front().op.dim())
        throw validation_error("generators act on different spaces");
      if (g.is_unitary) {
        Matrix defect = g.op.mat().adjoint() * g.op.mat() -
                        Matrix::Identity(g.op.dim(), g.op.dim());
        if (defect.norm() > kUnitaryCheckTol)
          throw validation_error("generator '" + g.label +
                                 "' is flagged unitary but is not");
      }
      if (g.pauli) {
        if (!g.is_unitary)
          throw validation_error("pauli generators must carry the unitary "
                                 "flag");
        Matrix pm = g.pauli->dense().mat();
        if (pm.rows() != g.op.dim() ||
            (pm - g.op.mat()).cwiseAbs().maxCoeff() > 1e-12)
          throw validation_error("generator '" + g.label +
                                 "' does not match its pauli word");
      }
    }
  }

  std::size_t size() const { return gens_.size(); }
  const Generator& at(std::size_t i) const { return gens_.at(i); }
  int dim() const { return gens_.empty() ? 0 : gens_.front().op.dim(); }
  bool all_pauli() const {
    for (const Generator& g : gens_)
      if (!g.pauli) return false;
    return !gens_.empty();
  }

 private:
  std::vector<Generator> gens_;
};

inline GeneratorSet pauli_generator_set(const std::vector<PauliString>& ps) {
  std::vector<Generator> gens;
  gens.reserve(ps.size());
  for (const PauliString& p : ps) gens.push_back(pauli_generator(p));
  return GeneratorSet(std::move(gens));
}

/// One surviving generator word: the word's image exactly as produced
/// (norm recorded, not renormalized), the accumulated Pauli product
/// when every letter was a Pauli word, and the labels of parallel
/// words merged into this representative.
struct RawVector {
  std::vector<std::size_t> word;  // generator indices, first applied first
  std::string label;              // operator-order rendering, e.g. "Z*X"
  PureState state;
  std::optional<PauliString> word_pauli;
  std::vector<std::string> merged_labels;
};

/// Spanning data for one neighborhood subspace. Immutable once built.
class NeighborhoodBasis {
 public:
  NeighborhoodBasis(PureState base, int k, std::vector<RawVector> raw,
                    std::vector<std::string> warnings)
      : base_(std::move(base)), k_(k), raw_(std::move(raw)),
        warnings_(std::move(warnings)) {
    std::size_t n = raw_.size();
    if (n == 0) throw validation_error("empty neighborhood basis");
    Matrix g(n, n);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        g(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
            raw_[a].state.amplitudes().dot(raw_[b].state.amplitudes());
    g = (0.5 * (g + Matrix(g.adjoint()))).eval();
    gram_ = DenseOperator(g);

    Matrix defect = g - Matrix::Identity(static_cast<Eigen::Index>(n),
                                         static_cast<Eigen::Index>(n));
    raw_orthonormal_ = defect.cwiseAbs().maxCoeff() <= kIdentityGramTol;
    if (raw_orthonormal_) {
      // Orthonormal images: the raw vectors are the basis and the Gram
      // pseudoinverse norm is exactly one.
      b_ = Matrix::Identity(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(n));
      rank_ = static_cast<int>(n);
      gram_pinv_norm_ = 1.0;
      return;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success)
      throw validation_error("gram eigendecomposition failed");
    double lam_max = es.eigenvalues().maxCoeff();
    if (!(lam_max > 0.0))
      throw validation_error("gram matrix has no positive spectrum");
    double threshold = kGramRelTol * lam_max;
    std::vector<Eigen::Index> kept;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > threshold) kept.push_back(i);
    rank_ = static_cast<int>(kept.size());
    b_ = Matrix(static_cast<Eigen::Index>(n), rank_);
    double lam_min = lam_max;
    for (std::size_t j = 0; j < kept.size(); ++j) {
      double lam = es.eigenvalues()(kept[j]);
      lam_min = std::min(lam_min, lam);
      b_.col(static_cast<Eigen::Index>(j)) =
          es.eigenvectors().col(kept[j]) / std::sqrt(lam);
    }
    gram_pinv_norm_ = 1.0 / lam_min;
  }

  const PureState& base() const { return base_; }
  int depth() const { return k_; }
  const std::vector<RawVector>& raw() const { return raw_; }
  const DenseOperator& gram() const { return gram_; }
  /// Coefficients of the orthonormal basis over the raw vectors; column
  /// j gives |psi_j> = sum_a B(a, j) |raw_a>.
  const Matrix& coeffs() const { return b_; }
  int rank() const { return rank_; }
  double gram_pinv_norm() const { return gram_pinv_norm_; }
  /// True when the raw images were already orthonormal, so the basis
  /// states are the raw vectors themselves (symbolic routes rely on
  /// this).
  bool raw_orthonormal() const { return raw_orthonormal_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Materializes orthonormal basis state j.
  PureState psi(int j) const {
    if (j < 0 || j >= rank_)
      throw validation_error("basis index out of range");
    Vector v = Vector::Zero(base_.dim());
    for (std::size_t a = 0; a < raw_.size(); ++a)
      v += b_(static_cast<Eigen::Index>(a), j) * raw_[a].state.amplitudes();
    return PureState(std::move(v), false);
  }

 private:
  PureState base_;
  int k_ = 0;
  std::vector<RawVector> raw_;
  DenseOperator gram_{Matrix::Identity(1, 1)};
  Matrix b_;
  int rank_ = 0;
  double gram_pinv_norm_ = 0.0;
  bool raw_orthonormal_ = false;
  std::vector<std::string> warnings_;
};

namespace detail {

inline std::string word_label(const GeneratorSet& gens,
                              const std::vector<std::size_t>& word) {
  if (word.empty()) return "(id)";
  std::string s;
  // Operator order: the last letter applied is written leftmost.
  for (std::size_t i = word.size(); i-- > 0;) {
    if (!s.empty()) s += "*";
    s += gens.at(word[i]).label;
  }
  return s;
}

}  // namespace detail

/// Enumerates generator words of length <= k on `base`, merging
/// numerically parallel images and dropping annihilated words with a
/// warning record.
inline NeighborhoodBasis generate(const PureState& base,
                                  const GeneratorSet& gens, int k,
                                  double dedup_tol = kDefaultDedupTol) {
  if (k < 0) throw validation_error("neighborhood depth must be >= 0");
  if (!(dedup_tol >= 0.0 && dedup_tol < 1.0))
    throw validation_error("dedup tolerance must lie in [0, 1)");
  if (base.dim() == 0 || base.amplitudes().norm() <= kZeroWordTol)
    throw validation_error("base state has zero norm");
  if (gens.size() > 0 && gens.dim() != base.dim())
    throw validation_error("generators do not act on the base space");

  bool track_pauli = gens.all_pauli();
  int m_qubits = 0;
  if (track_pauli) {
    m_qubits = gens.at(0).pauli->qubits();
    track_pauli = (1 << m_qubits) == base.dim();
  }

  std::vector<RawVector> raw;
  std::vector<std::string> warnings;
  RawVector root{{},
                 "(id)",
                 base,
                 track_pauli ? std::optional<PauliString>(
                                   PauliString(m_qubits))
                             : std::nullopt,
                 {}};
  raw.push_back(std::move(root));
  std::vector<std::size_t> frontier{0};

  for (int level = 1; level <= k && !frontier.empty(); ++level) {
    std::vector<std::size_t> next;
    for (std::size_t rep : frontier) {
      for (std::size_t gi = 0; gi < gens.size(); ++gi) {
        std::vector<std::size_t> word = raw[rep].word;
        word.push_back(gi);
        std::string label = detail::word_label(gens, word);
        Vector v = gens.at(gi).op.mat() * raw[rep].state.amplitudes();
        double nv = v.norm();
        if (nv <= kZeroWordTol) {
          warnings.push_back("word " + label +
                             " annihilates the base state; dropped");
          continue;
        }
        bool merged = false;
        for (RawVector& existing : raw) {
          double na = existing.state.amplitudes().norm();
          double overlap =
              std::abs(existing.state.amplitudes().dot(v)) / (na * nv);
          if (overlap >= 1.0 - dedup_tol) {
            existing.merged_labels.push_back(label);
            merged = true;
            break;
          }
        }
        if (merged) continue;
        if (raw.size() >= static_cast<std::size_t>(kDimCap))
          throw validation_error("neighborhood word count exceeds the "
                                 "desk-scale cap");
        std::optional<PauliString> wp;
        if (track_pauli)
          wp = pauli_mul(*gens.at(gi).pauli, *raw[rep].word_pauli);
        raw.push_back(RawVector{std::move(word), std::move(label),
                                PureState(std::move(v), false),
                                std::move(wp),
                                {}});
        next.push_back(raw.size() - 1);
      }
    }
    frontier = std::move(next);
  }
  return NeighborhoodBasis(base, k, std::move(raw), std::move(warnings));
}

/// i^c |psi_a><psi_b| + h.c. over the orthonormal basis; the diagonal
/// phase-0 case is the bare projector |psi_a><psi_a|.
inline DenseOperator element_operator(const NeighborhoodBasis& basis, int a,
                                      int b, int phase_c) {
  if (a < 0 || a >= basis.rank() || b < 0 || b >= basis.rank())
    throw validation_error("element indices out of range");
  if (phase_c != 0 && phase_c != 1)
    throw validation_error("element phase must be 0 or 1");
  if (a == b && phase_c == 1)
    throw validation_error("diagonal elements with imaginary phase vanish");
  Vector va = basis.psi(a).amplitudes();
  if (a == b) return DenseOperator(va * va.adjoint());
  Vector vb = basis.psi(b).amplitudes();
  Complex ic = phase_c ? Complex(0.0, 1.0) : Complex(1.0, 0.0);
  Matrix half = ic * (va * vb.adjoint());
  return DenseOperator((half + Matrix(half.adjoint())).eval());
}

/// Worst case over unit superpositions sum_a alpha_a |psi_a> of the
/// triangle-inequality cost sum: with Q_aa the diagonal cost and
/// Q_ab = (Z_ab_re + Z_ab_im) / 2 off the diagonal, the bound is the
/// top eigenvalue of Q, reached by maximizing beta^T Q beta over the
/// unit vector beta_a = |alpha_a|. `element_zs` packs the costs like
/// the sampling plan: diagonal entries for projectors, the upper
/// triangle for real parts, the lower for imaginary parts.
inline double superposition_cost_bound(const NeighborhoodBasis& basis,
                                       const Eigen::MatrixXd& element_zs) {
  int r = basis.rank();
  if (element_zs.rows() != r || element_zs.cols() != r)
    throw validation_error("element cost matrix must be rank x rank");
  if (!element_zs.allFinite() || element_zs.minCoeff() < 0.0)
    throw validation_error("element costs must be finite and nonnegative");
  Eigen::MatrixXd q(r, r);
  for (int a = 0; a < r; ++a) {
    q(a, a) = element_zs(a, a);
    for (int b = a + 1; b < r; ++b) {
      double v = 0.5 * (element_zs(a, b) + element_zs(b, a));
      q(a, b) = v;
      q(b, a) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q);
  if (es.info() != Eigen::Success)
    throw validation_error("cost bound eigendecomposition failed");
  return es.eigenvalues().maxCoeff();
}

}  // namespace demesst
