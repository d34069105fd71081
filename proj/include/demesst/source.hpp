// Copyright 2026 The demesst Authors
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

/// Physical state sources: either an exact density matrix or a pure
/// state pushed through a short-time noise channel. The cached density
/// matrix is validated once (PSD within -1e-10, unit trace within
/// 1e-10) and shared by every consumer.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "demesst/core.hpp"

namespace demesst {

/// PSD slack allowed in a cached density matrix.
inline constexpr double kSourcePsdTol = 1e-10;
/// Trace slack allowed in a cached density matrix.
inline constexpr double kSourceTraceTol = 1e-10;
/// Eigenvalue dust clipped to zero when a channel output is reassembled.
inline constexpr double kChannelClipTol = 1e-12;
/// Largest dimensionless rate the first-order channel accepts.
inline constexpr double kMaxGammaT = 0.1;

/// A labeled jump operator of the noise model.
struct JumpOperator {
  std::string label;
  DenseOperator op;
};

/// A known quantum state an experiment draws samples from.
class PhysicalStateSource {
 public:
  enum class Kind { exact_density, channel_applied };

  /// Wraps a density matrix supplied directly.
  static PhysicalStateSource exact_density(DenseOperator rho) {
    PhysicalStateSource s;
    s.kind_ = Kind::exact_density;
    s.rho_ = std::move(rho);
    s.validate();
    return s;
  }

  /// Wraps the projector onto a pure state.
  static PhysicalStateSource from_pure(const PureState& psi) {
    return exact_density(psi.projector());
  }

  Kind kind() const { return kind_; }
  const DenseOperator& density() const { return rho_; }
  int dim() const { return rho_.dim(); }

  /// Channel metadata; zero / empty for exact_density sources.
  double gamma_t() const { return gamma_t_; }
  int repetitions() const { return repetitions_; }
  const std::vector<std::string>& jump_labels() const { return jump_labels_; }

  friend PhysicalStateSource apply_channel(const PureState& base,
                                           const std::vector<JumpOperator>& jumps,
                                           double gamma_t, int repetitions);

 private:
  PhysicalStateSource() = default;

  void validate() const {
    if (!rho_.is_hermitian())
      throw validation_error("density matrix must be Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho_.mat(),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) < -kSourcePsdTol)
      throw validation_error("density matrix has a negative eigenvalue (" +
                             std::to_string(es.eigenvalues()(0)) + ")");
    if (std::abs(rho_.trace().real() - 1.0) > kSourceTraceTol ||
        std::abs(rho_.trace().imag()) > kSourceTraceTol)
      throw validation_error("density matrix must have unit trace");
  }

  Kind kind_ = Kind::exact_density;
  DenseOperator rho_;
  double gamma_t_ = 0.0;
  int repetitions_ = 0;
  std::vector<std::string> jump_labels_;
};

/// Pushes |base><base| through a first-order Kraus expansion of the
/// dissipator with dimensionless rate gamma_t. Kraus set: sqrt(gamma_t)
/// L_i together with K_0 = I - (gamma_t/2) sum_i L_i^dag L_i. The set
/// is completely positive, so negative eigenvalues can only be
/// floating-point dust; anything below the clip tolerance is zeroed
/// and the output renormalized to unit trace. Applying the channel
/// r times composes r identical short-time steps.
inline PhysicalStateSource apply_channel(const PureState& base,
                                         const std::vector<JumpOperator>& jumps,
                                         double gamma_t, int repetitions = 1) {
  const int d = base.dim();
  if (!(gamma_t >= 0.0))
    throw validation_error("gamma_t must be nonnegative");
  if (gamma_t > kMaxGammaT)
    throw validation_error(
        "gamma_t exceeds the first-order regime cap of 0.1");
  if (repetitions < 1)
    throw validation_error("channel repetitions must be >= 1");
  for (const auto& j : jumps)
    if (j.op.dim() != d)
      throw validation_error("jump operator dimension mismatch");

  Matrix rho = base.projector().mat();
  if (gamma_t > 0.0 && !jumps.empty()) {
    Matrix damp = Matrix::Zero(d, d);
    for (const auto& j : jumps)
      damp += j.op.mat().adjoint() * j.op.mat();
    Matrix k0 = Matrix::Identity(d, d) - 0.5 * gamma_t * damp;
    for (int r = 0; r < repetitions; ++r) {
      Matrix next = k0 * rho * k0.adjoint();
      for (const auto& j : jumps)
        next += gamma_t * (j.op.mat() * rho * j.op.mat().adjoint());
      rho = 0.5 * (next + next.adjoint().eval());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho);
    if (es.eigenvalues()(0) < -kSourcePsdTol)
      throw validation_error(
          "channel output is not positive semidefinite; gamma_t is too "
          "large for a first-order expansion");
    Eigen::VectorXd lam = es.eigenvalues();
    for (int i = 0; i < d; ++i)
      if (lam(i) < kChannelClipTol) lam(i) = 0.0;
    double tr = lam.sum();
    if (!(tr > 0.0))
      throw validation_error("channel output has vanishing trace");
    rho = es.eigenvectors() * (lam / tr).asDiagonal() *
          es.eigenvectors().adjoint();
    rho = 0.5 * (rho + rho.adjoint().eval());
  }

  PhysicalStateSource s;
  s.kind_ = PhysicalStateSource::Kind::channel_applied;
  s.rho_ = DenseOperator(std::move(rho));
  s.gamma_t_ = gamma_t;
  s.repetitions_ = repetitions;
  s.jump_labels_.reserve(jumps.size());
  for (const auto& j : jumps) s.jump_labels_.push_back(j.label);
  s.validate();
  return s;
}

}  // namespace demesst
