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

/// \file bosonic.hpp
/// Truncated-Fock-space building blocks: mode operators, displacement
/// unitaries, displaced-parity measurements (Wigner-point readout) and
/// displaced vacuum projections (Husimi-point readout).

#include <cmath>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/measurement.hpp"

namespace demesst {

/// Annihilation operator on a cutoff-level Fock space: a|n> = sqrt(n)|n-1>.
inline Matrix mode_annihilation(int cutoff) {
  if (cutoff < 2) throw validation_error("fock cutoff must be >= 2");
  Matrix a = Matrix::Zero(cutoff, cutoff);
  for (int n = 1; n < cutoff; ++n)
    a(n - 1, n) = Complex(std::sqrt(static_cast<double>(n)), 0.0);
  return a;
}

/// Single-mode parity (-1)^n on the truncated space.
inline Matrix mode_parity(int cutoff) {
  Matrix p = Matrix::Zero(cutoff, cutoff);
  for (int n = 0; n < cutoff; ++n) p(n, n) = (n % 2 == 0) ? 1.0 : -1.0;
  return p;
}

/// Builds displacement unitaries D(alpha) = exp(alpha a^dag - conj(alpha) a)
/// on one truncated mode. The anti-Hermitian generator is exponentiated
/// exactly through one cached eigendecomposition of i(a^dag - a): for
/// alpha = r e^{i phi}, D(alpha) = R_phi exp(-i r g) R_phi^dag with
/// R_phi = diag(e^{i phi n}). The result is unitary to rounding, so
/// conjugated parity spectra stay exactly +-1.
class DisplacementEngine {
 public:
  explicit DisplacementEngine(int cutoff) : cutoff_(cutoff) {
    Matrix a = mode_annihilation(cutoff);
    Matrix g = Complex(0.0, 1.0) * (a.adjoint() - a);
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success)
      throw validation_error("displacement generator eigendecomposition "
                             "failed");
    vecs_ = es.eigenvectors();
    evals_ = es.eigenvalues();
  }

  int cutoff() const { return cutoff_; }

  /// Dense displacement matrix, O(cutoff^2) after the cached setup.
  Matrix displacement(Complex alpha) const {
    double r = std::abs(alpha);
    double phi = std::arg(alpha);
    Vector phase(cutoff_);
    for (int n = 0; n < cutoff_; ++n)
      phase(n) = std::exp(Complex(0.0, phi * n));
    Vector rot(cutoff_);
    for (int n = 0; n < cutoff_; ++n)
      rot(n) = std::exp(Complex(0.0, -r * evals_(n)));
    Matrix core = vecs_ * rot.asDiagonal() * vecs_.adjoint();
    return phase.asDiagonal() * core * phase.conjugate().asDiagonal();
  }

  /// D(alpha) applied to one basis vector |k>, O(cutoff^2).
  Vector displaced_basis(Complex alpha, int k) const {
    if (k < 0 || k >= cutoff_)
      throw validation_error("basis index out of range");
    double r = std::abs(alpha);
    double phi = std::arg(alpha);
    Vector v = vecs_.row(k).adjoint() * std::exp(Complex(0.0, -phi * k));
    for (int n = 0; n < cutoff_; ++n)
      v(n) *= std::exp(Complex(0.0, -r * evals_(n)));
    Vector out = vecs_ * v;
    for (int n = 0; n < cutoff_; ++n)
      out(n) *= std::exp(Complex(0.0, phi * n));
    return out;
  }

  Vector displaced_vacuum(Complex alpha) const {
    return displaced_basis(alpha, 0);
  }

  /// D(alpha) v without materializing the matrix, O(cutoff^2).
  Vector apply_displacement(Complex alpha, const Vector& v) const {
    if (v.size() != cutoff_)
      throw validation_error("displacement vector size mismatch");
    double r = std::abs(alpha);
    double phi = std::arg(alpha);
    Vector u(cutoff_);
    for (int n = 0; n < cutoff_; ++n)
      u(n) = v(n) * std::exp(Complex(0.0, -phi * n));
    u = (vecs_.adjoint() * u).eval();
    for (int n = 0; n < cutoff_; ++n)
      u(n) *= std::exp(Complex(0.0, -r * evals_(n)));
    u = (vecs_ * u).eval();
    for (int n = 0; n < cutoff_; ++n)
      u(n) *= std::exp(Complex(0.0, phi * n));
    return u;
  }

 private:
  int cutoff_;
  Matrix vecs_;
  Eigen::VectorXd evals_;
};

namespace detail {

inline std::string format_points(const std::vector<Complex>& alpha,
                                 int cutoff) {
  std::string s;
  char buf[80];
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) s += ";";
    std::snprintf(buf, sizeof(buf), "(%.9g,%.9g)", alpha[i].real(),
                  alpha[i].imag());
    s += buf;
  }
  std::snprintf(buf, sizeof(buf), ":cutoff=%d", cutoff);
  s += buf;
  return s;
}

inline void check_bosonic_points(const std::vector<Complex>& alpha,
                                 const HilbertSpec& spec, double alpha_max) {
  if (spec.kind() != HilbertSpec::Kind::bosonic)
    throw validation_error("phase-space measurement requires a bosonic "
                           "space");
  if (static_cast<int>(alpha.size()) != spec.sites())
    throw validation_error("one displacement per mode required");
  for (const Complex& a : alpha)
    if (std::abs(a) > alpha_max)
      throw validation_error("|alpha| exceeds alpha_max; displacement "
                             "outside the trusted truncation window");
}

struct SignedPair {
  Matrix plus, minus;  // eigenprojectors after snapping to +-1
  double quality;      // max deviation of an eigenvalue from +-1
};

inline SignedPair snapped_parity_pair(const DisplacementEngine& engine,
                                      Complex alpha) {
  int n = engine.cutoff();
  Matrix d = engine.displacement(alpha);
  Matrix m = d * mode_parity(n) * d.adjoint();
  m = 0.5 * (m + Matrix(m.adjoint()));
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  SignedPair out;
  out.plus = Matrix::Zero(n, n);
  out.minus = Matrix::Zero(n, n);
  out.quality = 0.0;
  for (int i = 0; i < n; ++i) {
    double ev = es.eigenvalues()(i);
    out.quality = std::max(out.quality, std::abs(std::abs(ev) - 1.0));
    Matrix proj = es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    if (ev >= 0.0)
      out.plus += proj;
    else
      out.minus += proj;
  }
  return out;
}

}  // namespace detail

inline constexpr double kDefaultAlphaMax = 8.0;
inline constexpr double kParityQualityThreshold = 1e-6;

/// Displaced-parity measurement: observable D_a (-1)^{sum n} D_a^dag with
/// one (alpha) per mode, outcomes +-1 assigned by eigenvalue sign. The
/// worst per-mode eigenvalue deviation from +-1 is the truncation
/// quality; exceeding the threshold means the cutoff is too small.
inline MeasurementPtr displaced_parity(const std::vector<Complex>& alpha,
                                       const HilbertSpec& spec,
                                       double alpha_max = kDefaultAlphaMax,
                                       double quality_threshold =
                                           kParityQualityThreshold,
                                       double* quality_out = nullptr) {
  detail::check_bosonic_points(alpha, spec, alpha_max);
  DisplacementEngine engine(spec.cutoff());
  Matrix plus(1, 1), minus(1, 1);
  plus(0, 0) = 1.0;
  minus(0, 0) = 0.0;
  double quality = 0.0;
  for (const Complex& a : alpha) {
    detail::SignedPair pair = detail::snapped_parity_pair(engine, a);
    quality = std::max(quality, pair.quality);
    DenseOperator p(std::move(pair.plus)), m(std::move(pair.minus));
    DenseOperator pp(plus), pm(minus);
    plus = (tensor_product(pp, p).mat() + tensor_product(pm, m).mat()).eval();
    minus = (tensor_product(pp, m).mat() + tensor_product(pm, p).mat()).eval();
  }
  if (quality > quality_threshold)
    throw validation_error(
        "displaced parity truncation quality " + std::to_string(quality) +
        " exceeds threshold; increase the fock cutoff");
  if (quality_out) *quality_out = quality;
  std::vector<DenseOperator> effects;
  effects.emplace_back(std::move(plus));
  effects.emplace_back(std::move(minus));
  return std::make_shared<MeasurementOperator>(
      "wpar:" + detail::format_points(alpha, spec.cutoff()),
      std::move(effects), std::vector<double>{1.0, -1.0},
      RealizationTag::displaced_parity);
}

/// Displaced vacuum projection: effect D_a|0><0|D_a^dag per mode,
/// tensored; outcomes {1, 0}, range 1.
inline MeasurementPtr vacuum_projection(const std::vector<Complex>& alpha,
                                        const HilbertSpec& spec,
                                        double alpha_max = kDefaultAlphaMax) {
  detail::check_bosonic_points(alpha, spec, alpha_max);
  DisplacementEngine engine(spec.cutoff());
  Vector state(1);
  state(0) = 1.0;
  for (const Complex& a : alpha)
    state = tensor_product(state, engine.displaced_vacuum(a));
  Matrix proj = state * state.adjoint();
  Matrix rest = Matrix::Identity(proj.rows(), proj.cols()) - proj;
  std::vector<DenseOperator> effects;
  effects.emplace_back(std::move(proj));
  effects.emplace_back(std::move(rest));
  return std::make_shared<MeasurementOperator>(
      "qvac:" + detail::format_points(alpha, spec.cutoff()),
      std::move(effects), std::vector<double>{1.0, 0.0},
      RealizationTag::vacuum_projection);
}

}  // namespace demesst
