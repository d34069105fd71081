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

/// \file wigner.hpp
/// Phase-space decomposition of a bosonic target. The operator identity
/// sigma = 2^m integral W_sigma(alpha) M(alpha) d^{2m}alpha, with
/// M(alpha) the displaced parity observable, is discretized by the
/// midpoint rule on a square box: one term f(alpha) = 2^m W_sigma(alpha)
/// h^{2m} per grid point, so Z approaches 2^{m+1} integral |W_sigma|.
/// The quadrature error is estimated by re-evaluating the cost on the
/// half-step grid.
///
/// The truncated displacement garbles amplitudes near the Fock cutoff,
/// so the cutoff must grow with the box corner |alpha|^2 = 2 alpha_max^2
/// (see suggested_fock_cutoff). Grids over three or more modes are never
/// materialized; product targets use the factorized cost instead.

#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "demesst/bosonic.hpp"
#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/measurement.hpp"

namespace demesst {

/// Uniform midpoint-rule grid on [-alpha_max, alpha_max]^2 per mode.
/// The step must divide the box edge 2*alpha_max evenly.
struct PhaseGrid {
  double alpha_max = 4.0;
  double step = 0.1;
};

/// Fock cutoff that keeps box-corner displacements faithful: the corner
/// coherent state has mean photon number 2 alpha_max^2; add a five-sigma
/// Poisson tail and a small floor.
inline int suggested_fock_cutoff(double alpha_max) {
  double mean = 2.0 * alpha_max * alpha_max;
  return static_cast<int>(std::ceil(mean + 5.0 * std::sqrt(mean) + 10.0));
}

namespace detail {

inline constexpr double kWignerTwoOverPi = 0.63661977236758134;
inline constexpr int kMaxJointGridPoints = 600000;

inline int grid_points_per_axis(const PhaseGrid& grid) {
  if (!(grid.step > 0.0) || !(grid.alpha_max > 0.0))
    throw validation_error("phase grid needs positive step and extent");
  double n = 2.0 * grid.alpha_max / grid.step;
  int ni = static_cast<int>(std::lround(n));
  if (ni < 1 || std::abs(n - ni) > 1e-9)
    throw validation_error("grid step must divide the box edge evenly");
  return ni;
}

inline std::vector<double> grid_midpoints(const PhaseGrid& grid) {
  int n = grid_points_per_axis(grid);
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    xs[static_cast<std::size_t>(i)] = -grid.alpha_max + (i + 0.5) * grid.step;
  return xs;
}

/// Signed spectral form of a Hermitian operator, negligible eigenvalues
/// dropped, for fast repeated Wigner evaluations.
struct SpectralForm {
  std::vector<double> weights;
  std::vector<Vector> vectors;
};

inline SpectralForm spectral_form(const DenseOperator& op, double tol) {
  if (!op.is_hermitian())
    throw validation_error("wigner target must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.mat());
  if (es.info() != Eigen::Success)
    throw validation_error("wigner target eigendecomposition failed");
  SpectralForm out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    if (std::abs(es.eigenvalues()(i)) <= tol) continue;
    out.weights.push_back(es.eigenvalues()(i));
    out.vectors.push_back(es.eigenvectors().col(i));
  }
  return out;
}

inline double fock_parity_weight(const Vector& u) {
  double acc = 0.0;
  for (Eigen::Index n = 0; n < u.size(); ++n) {
    double a2 = std::norm(u(n));
    acc += (n % 2 == 0) ? a2 : -a2;
  }
  return acc;
}

/// W_sigma(alpha) = (2/pi) tr(sigma D(alpha) P D(alpha)^dag) on one mode,
/// evaluated as a parity-weighted sum over displaced eigenvectors.
inline double wigner_value(const SpectralForm& sigma,
                           const DisplacementEngine& engine, Complex alpha) {
  double acc = 0.0;
  for (std::size_t k = 0; k < sigma.weights.size(); ++k)
    acc += sigma.weights[k] *
           fock_parity_weight(engine.apply_displacement(-alpha,
                                                        sigma.vectors[k]));
  return acc * kWignerTwoOverPi;
}

/// Single-mode table of W values over the square grid, rows indexed by
/// Re(alpha) and columns by Im(alpha).
inline Eigen::MatrixXd wigner_table(const SpectralForm& sigma,
                                    const DisplacementEngine& engine,
                                    const PhaseGrid& grid) {
  std::vector<double> xs = grid_midpoints(grid);
  int n = static_cast<int>(xs.size());
  Eigen::MatrixXd w(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      w(i, j) = wigner_value(
          sigma, engine,
          Complex(xs[static_cast<std::size_t>(i)],
                  xs[static_cast<std::size_t>(j)]));
  return w;
}

/// Two-mode W value: each eigenvector is reshaped to a cutoff x cutoff
/// matrix (first mode indexing rows) and displaced mode by mode.
inline double wigner_value_joint(const SpectralForm& sigma,
                                 const DisplacementEngine& engine,
                                 Complex a1, Complex a2) {
  int c = engine.cutoff();
  double acc = 0.0;
  for (std::size_t k = 0; k < sigma.weights.size(); ++k) {
    Matrix u(c, c);
    for (int r = 0; r < c; ++r)
      for (int s = 0; s < c; ++s)
        u(r, s) = sigma.vectors[k](static_cast<Eigen::Index>(r) * c + s);
    for (int s = 0; s < c; ++s)
      u.col(s) = engine.apply_displacement(-a1, u.col(s));
    Matrix ut = u.transpose();
    for (int r = 0; r < c; ++r)
      ut.col(r) = engine.apply_displacement(-a2, ut.col(r));
    double parity = 0.0;
    for (int s = 0; s < c; ++s)
      for (int r = 0; r < c; ++r) {
        double a2norm = std::norm(ut(s, r));
        parity += ((r + s) % 2 == 0) ? a2norm : -a2norm;
      }
    acc += sigma.weights[k] * parity;
  }
  return acc * kWignerTwoOverPi * kWignerTwoOverPi;
}

}  // namespace detail

/// Cost summary for a product target sigma_1 x ... x sigma_m whose
/// Wigner function factorizes: Z = 2^{m+1} prod_k (h^2 sum |W_k|),
/// evaluated per mode without ever forming the joint grid.
struct ProductWignerCost {
  double z = 0.0;          // cost from the requested grid
  double z_refined = 0.0;  // cost from the half-step grid
  double residual = 0.0;   // relative difference between the two
  std::vector<double> mode_abs_integrals;  // h^2 sum |W_k| per mode
};

inline ProductWignerCost product_wigner_cost(
    const std::vector<DenseOperator>& mode_sigmas, int cutoff,
    const PhaseGrid& grid) {
  if (mode_sigmas.empty())
    throw validation_error("product cost needs at least one mode");
  if (cutoff < 2) throw validation_error("fock cutoff must be at least 2");
  DisplacementEngine engine(cutoff);
  PhaseGrid half{grid.alpha_max, grid.step / 2.0};
  double h2 = grid.step * grid.step;
  double h2_half = half.step * half.step;
  ProductWignerCost out;
  out.z = std::pow(2.0, static_cast<double>(mode_sigmas.size()) + 1.0);
  out.z_refined = out.z;
  for (const DenseOperator& sigma : mode_sigmas) {
    if (sigma.dim() != cutoff)
      throw validation_error("mode operator does not match the cutoff");
    detail::SpectralForm form = detail::spectral_form(sigma, 1e-14);
    double coarse =
        h2 * detail::wigner_table(form, engine, grid).cwiseAbs().sum();
    double fine =
        h2_half * detail::wigner_table(form, engine, half).cwiseAbs().sum();
    out.mode_abs_integrals.push_back(coarse);
    out.z *= coarse;
    out.z_refined *= fine;
  }
  out.residual =
      std::abs(out.z - out.z_refined) / std::max(out.z_refined, 1e-12);
  return out;
}

/// Grid decomposition of a one- or two-mode Hermitian target into
/// lazily realized displaced-parity measurements. The half-step cost
/// comparison is stored through residual_out and enforced against
/// residual_threshold; exceeding it throws, as the grid cannot be
/// trusted. Targets on three or more modes are rejected: their grids
/// are astronomically large, and product targets should be costed with
/// product_wigner_cost instead.
/// Displaced-parity measurement on a subset of modes of a wider bosonic
/// space; every remaining mode is simultaneously checked against vacuum.
/// Outcomes: +-1 for the parity branches whose vacuum check passes, 0
/// when any projected mode is found occupied. The outcome range stays 2.
inline MeasurementPtr displaced_parity_on_modes(
    const std::vector<Complex>& alpha, const std::vector<int>& active_modes,
    const HilbertSpec& spec, double alpha_max = kDefaultAlphaMax) {
  if (spec.kind() != HilbertSpec::Kind::bosonic)
    throw validation_error("phase-space measurement requires a bosonic "
                           "space");
  int total = spec.sites();
  if (active_modes.empty() ||
      alpha.size() != active_modes.size())
    throw validation_error("one displacement per active mode required");
  for (std::size_t i = 0; i < active_modes.size(); ++i) {
    if (active_modes[i] < 0 || active_modes[i] >= total)
      throw validation_error("active mode index out of range");
    if (i > 0 && active_modes[i] <= active_modes[i - 1])
      throw validation_error("active modes must be strictly increasing");
  }
  HilbertSpec reduced = HilbertSpec::bosonic(
      static_cast<int>(active_modes.size()), spec.cutoff());
  if (static_cast<int>(active_modes.size()) == total)
    return displaced_parity(alpha, reduced, alpha_max);
  MeasurementPtr parity = displaced_parity(alpha, reduced, alpha_max);

  // Joint indices run with mode 0 most significant; lift each reduced
  // index to the full space with every passive-mode digit pinned to 0.
  int base = spec.cutoff();
  Eigen::Index d_full = spec.dimension();
  Eigen::Index d_red = reduced.dimension();
  std::vector<Eigen::Index> stride(static_cast<std::size_t>(total), 1);
  for (int i = total - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] * base;
  std::vector<Eigen::Index> lift(static_cast<std::size_t>(d_red), 0);
  for (Eigen::Index xr = 0; xr < d_red; ++xr) {
    Eigen::Index rem = xr;
    Eigen::Index full = 0;
    for (std::size_t a = active_modes.size(); a-- > 0;) {
      full += (rem % base) * stride[static_cast<std::size_t>(active_modes[a])];
      rem /= base;
    }
    lift[static_cast<std::size_t>(xr)] = full;
  }
  Matrix plus = Matrix::Zero(d_full, d_full);
  Matrix minus = Matrix::Zero(d_full, d_full);
  const Matrix& rp = parity->effects()[0].mat();
  const Matrix& rm = parity->effects()[1].mat();
  for (Eigen::Index xr = 0; xr < d_red; ++xr)
    for (Eigen::Index yr = 0; yr < d_red; ++yr) {
      plus(lift[static_cast<std::size_t>(xr)],
           lift[static_cast<std::size_t>(yr)]) = rp(xr, yr);
      minus(lift[static_cast<std::size_t>(xr)],
            lift[static_cast<std::size_t>(yr)]) = rm(xr, yr);
    }
  Matrix rest = Matrix::Identity(d_full, d_full) - plus - minus;
  std::vector<DenseOperator> effects;
  effects.emplace_back(std::move(plus));
  effects.emplace_back(std::move(minus));
  effects.emplace_back(std::move(rest));
  std::string id = "wparvac:" + detail::format_points(alpha, spec.cutoff()) +
                   ":modes=";
  for (std::size_t i = 0; i < active_modes.size(); ++i) {
    if (i) id += ";";
    id += std::to_string(active_modes[i]);
  }
  id += "of" + std::to_string(total);
  return std::make_shared<MeasurementOperator>(
      std::move(id), std::move(effects), std::vector<double>{1.0, -1.0, 0.0},
      RealizationTag::custom);
}

namespace detail {

/// Shared midpoint-rule walk: evaluates the Wigner function of `sigma`
/// over the grid, emits one term per point through `make_ref`, and
/// rejects grids whose half-step cost disagrees beyond the threshold.
inline Decomposition wigner_grid_core(
    const DenseOperator& sigma, int modes, int cutoff, const PhaseGrid& grid,
    double residual_threshold, std::string target_id, double* residual_out,
    const std::function<MeasurementRef(const std::vector<Complex>&)>&
        make_ref) {
  DisplacementEngine engine(cutoff);
  detail::SpectralForm form = detail::spectral_form(sigma, 1e-14);
  std::vector<double> xs = detail::grid_midpoints(grid);
  int n = static_cast<int>(xs.size());
  double cell = std::pow(grid.step * grid.step, modes);
  double scale = std::pow(2.0, modes);

  long long fine_points = 1;
  for (int k = 0; k < 2 * modes; ++k) fine_points *= 2LL * n;
  if (fine_points > detail::kMaxJointGridPoints)
    throw validation_error("grid too large to materialize; coarsen the "
                           "step or shrink the box");

  PhaseGrid half{grid.alpha_max, grid.step / 2.0};
  std::vector<double> xs_half = detail::grid_midpoints(half);
  int nh = static_cast<int>(xs_half.size());
  double cell_half = std::pow(half.step * half.step, modes);

  std::vector<DecompTerm> terms;
  double abs_sum = 0.0;
  double abs_sum_half = 0.0;

  auto push_term = [&](const std::vector<Complex>& alpha, double w) {
    double f = scale * w * cell;
    abs_sum += std::abs(w);
    if (std::abs(f) < 1e-14) return;
    terms.push_back(DecompTerm{make_ref(alpha), f});
  };

  if (modes == 1) {
    Eigen::MatrixXd w = detail::wigner_table(form, engine, grid);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        push_term({Complex(xs[static_cast<std::size_t>(i)],
                           xs[static_cast<std::size_t>(j)])},
                  w(i, j));
    abs_sum_half =
        detail::wigner_table(form, engine, half).cwiseAbs().sum();
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            Complex a1(xs[static_cast<std::size_t>(i)],
                       xs[static_cast<std::size_t>(j)]);
            Complex a2(xs[static_cast<std::size_t>(k)],
                       xs[static_cast<std::size_t>(l)]);
            push_term({a1, a2},
                      detail::wigner_value_joint(form, engine, a1, a2));
          }
    for (int i = 0; i < nh; ++i)
      for (int j = 0; j < nh; ++j)
        for (int k = 0; k < nh; ++k)
          for (int l = 0; l < nh; ++l)
            abs_sum_half += std::abs(detail::wigner_value_joint(
                form, engine,
                Complex(xs_half[static_cast<std::size_t>(i)],
                        xs_half[static_cast<std::size_t>(j)]),
                Complex(xs_half[static_cast<std::size_t>(k)],
                        xs_half[static_cast<std::size_t>(l)])));
  }

  double z = 2.0 * scale * cell * abs_sum;
  double z_half = 2.0 * scale * cell_half * abs_sum_half;
  double residual = std::abs(z - z_half) / std::max(z_half, 1e-12);
  if (residual_out) *residual_out = residual;
  if (residual > residual_threshold)
    throw validation_error("grid too coarse: half-step cost differs by a "
                           "factor beyond the threshold");

  if (target_id.empty())
    target_id = "wigner:" + hex16(fnv1a64_matrix(sigma.mat()));
  return Decomposition(std::move(target_id), 0.0, std::move(terms));
}

/// Box corners sit at |alpha| = sqrt(2) * alpha_max per mode; widen the
/// trusted displacement window accordingly.
inline double grid_alpha_cap(const PhaseGrid& grid) {
  return std::max(kDefaultAlphaMax,
                  std::sqrt(2.0) * grid.alpha_max + grid.step);
}

}  // namespace detail

inline Decomposition wigner_decompose(const DenseOperator& sigma,
                                      const HilbertSpec& spec,
                                      const PhaseGrid& grid,
                                      double residual_threshold = 0.05,
                                      std::string target_id = std::string(),
                                      double* residual_out = nullptr) {
  if (spec.kind() != HilbertSpec::Kind::bosonic)
    throw validation_error("wigner_decompose needs a bosonic space");
  if (spec.dimension() != sigma.dim())
    throw validation_error("wigner_decompose: dimension mismatch");
  int modes = spec.sites();
  if (modes != 1 && modes != 2)
    throw validation_error(
        "wigner_decompose materializes grids for one or two modes only; "
        "use product_wigner_cost for wider product targets");
  double alpha_cap = detail::grid_alpha_cap(grid);
  int cutoff = spec.cutoff();
  auto make_ref = [spec, alpha_cap,
                   cutoff](const std::vector<Complex>& alpha) {
    std::string id = "wpar:" + detail::format_points(alpha, cutoff);
    HilbertSpec spec_copy = spec;
    return MeasurementRef(std::move(id), 2.0, [alpha, spec_copy, alpha_cap] {
      return displaced_parity(alpha, spec_copy, alpha_cap);
    });
  };
  return detail::wigner_grid_core(sigma, modes, cutoff, grid,
                                  residual_threshold, std::move(target_id),
                                  residual_out, make_ref);
}

/// Phase-space decomposition of an operator that factors as `sigma` on
/// the listed modes and a vacuum projector on every other mode of the
/// full space. Each term measures displaced parity on the active modes
/// while checking the projected modes against vacuum (outcome 0 when the
/// check fails), so the term cost matches the plain parity route.
inline Decomposition wigner_decompose_embedded(
    const DenseOperator& sigma, const std::vector<int>& active_modes,
    const HilbertSpec& spec, const PhaseGrid& grid,
    double residual_threshold = 0.05, std::string target_id = std::string(),
    double* residual_out = nullptr) {
  if (spec.kind() != HilbertSpec::Kind::bosonic)
    throw validation_error("wigner_decompose needs a bosonic space");
  int modes = static_cast<int>(active_modes.size());
  if (modes == spec.sites())
    return wigner_decompose(sigma, spec, grid, residual_threshold,
                            std::move(target_id), residual_out);
  if (modes != 1 && modes != 2)
    throw validation_error(
        "wigner_decompose materializes grids for one or two modes only; "
        "use product_wigner_cost for wider product targets");
  int cutoff = spec.cutoff();
  HilbertSpec reduced = HilbertSpec::bosonic(modes, cutoff);
  if (reduced.dimension() != sigma.dim())
    throw validation_error("wigner_decompose: dimension mismatch");
  for (std::size_t i = 0; i < active_modes.size(); ++i) {
    if (active_modes[i] < 0 || active_modes[i] >= spec.sites())
      throw validation_error("active mode index out of range");
    if (i > 0 && active_modes[i] <= active_modes[i - 1])
      throw validation_error("active modes must be strictly increasing");
  }
  double alpha_cap = detail::grid_alpha_cap(grid);
  auto make_ref = [spec, active_modes, alpha_cap,
                   cutoff](const std::vector<Complex>& alpha) {
    std::string id = "wparvac:" + detail::format_points(alpha, cutoff) +
                     ":modes=";
    for (std::size_t i = 0; i < active_modes.size(); ++i) {
      if (i) id += ";";
      id += std::to_string(active_modes[i]);
    }
    id += "of" + std::to_string(spec.sites());
    HilbertSpec spec_copy = spec;
    std::vector<int> modes_copy = active_modes;
    return MeasurementRef(std::move(id), 2.0,
                          [alpha, modes_copy, spec_copy, alpha_cap] {
                            return displaced_parity_on_modes(
                                alpha, modes_copy, spec_copy, alpha_cap);
                          });
  };
  return detail::wigner_grid_core(sigma, modes, cutoff, grid,
                                  residual_threshold, std::move(target_id),
                                  residual_out, make_ref);
}

}  // namespace demesst
