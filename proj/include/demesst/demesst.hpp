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

/// \file demesst.hpp
/// Subspace state tomography. Given an orthonormal neighborhood basis
/// {psi_j}, every matrix element <psi_j|rho|psi_l> is written as the
/// expectation of one or two Hermitian combinations
///
///   j == l : |psi_j><psi_j|                      (population)
///   j <  l : |psi_j><psi_l| + h.c.               (twice the real part)
///            i|psi_j><psi_l| + h.c.              (twice the imaginary part)
///
/// each decomposed over a measurement family and estimated by the
/// importance sampler. The assembled matrix is Hermitian by
/// construction and is not renormalized: the sum of the diagonal
/// estimates converges to the subspace population tr(P rho), which is
/// the built-in consistency check.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/families.hpp"
#include "demesst/hadamard.hpp"
#include "demesst/l1min.hpp"
#include "demesst/measurement.hpp"
#include "demesst/neighborhood.hpp"
#include "demesst/sampler.hpp"
#include "demesst/source.hpp"
#include "demesst/stabilizer.hpp"
#include "demesst/stabilizer_outer.hpp"
#include "demesst/wigner.hpp"

namespace demesst {

/// Raw-vector coefficients below this threshold do not count as support
/// when collecting the generator words behind a basis state.
inline constexpr double kElementSupportTol = 1e-12;

/// Relative entry tolerance when detecting modes on which an element
/// operator factors as a vacuum projector.
inline constexpr double kVacuumPeelTol = 1e-12;

/// Diagonal estimates add their decomposition constant times one, i.e.
/// they assume the source state has unit trace over the full space.
inline constexpr const char* kDiagonalOffsetNote =
    "mean_plus_c_assumes_unit_trace";

/// How one element operator is turned into a sampling decomposition.
enum class ElementRoute {
  /// Closed-form Pauli decomposition through the stabilizer group of the
  /// base state; needs orthonormal Pauli generator words.
  analytic_pauli,
  /// L1-minimizing program over the finite family as given.
  lp_over_family,
  /// Phase-space quadrature; modes the element leaves in vacuum are
  /// peeled off and checked by a joint vacuum projection instead of
  /// being displaced.
  wigner_grid,
  /// L1 program over the family enlarged with branch circuits: for
  /// words W_a, W_b the two branch measurements of a control
  /// U = W_a^dag W_b (and its -i twin) bracket W_a O W_b^dag + h.c.,
  /// so non-Pauli words become reachable.
  hadamard_expanded_lp,
};

/// Route selection plus the knobs each route needs. The group and
/// generator set are only consulted by the routes that require them.
struct RoutePolicy {
  ElementRoute route = ElementRoute::lp_over_family;
  std::optional<StabilizerGroup> group{};
  std::optional<GeneratorSet> generators{};
  PhaseGrid grid{};
  double wigner_residual_threshold = 0.05;
  double lp_tol = 1e-8;
  std::size_t dictionary_cap = kDictionaryCap;
};

/// Stable sampling-stream identifier of the (j, l, c) element estimate.
inline std::string element_target_id(int j, int l, int c) {
  return "elem:" + std::to_string(j) + "," + std::to_string(l) + ",c" +
         std::to_string(c);
}

namespace detail {

inline void check_element_indices(const NeighborhoodBasis& basis, int j,
                                  int l, int c) {
  if (j < 0 || j >= basis.rank() || l < 0 || l >= basis.rank())
    throw validation_error("element indices out of range");
  if (c != 0 && c != 1)
    throw validation_error("element phase must be 0 or 1");
  if (j == l && c == 1)
    throw validation_error("diagonal elements have no imaginary part");
}

inline Decomposition route_analytic(const NeighborhoodBasis& basis, int j,
                                    int l, int c, const RoutePolicy& policy,
                                    std::string target_id) {
  if (!policy.group)
    throw validation_error(
        "symbolic Pauli route needs the stabilizer group of the base state");
  if (!basis.raw_orthonormal())
    throw validation_error(
        "symbolic Pauli route requires orthonormal generator words; use an "
        "L1 route for mixed bases");
  const std::vector<RawVector>& raw = basis.raw();
  const std::optional<PauliString>& pj =
      raw[static_cast<std::size_t>(j)].word_pauli;
  const std::optional<PauliString>& pl =
      raw[static_cast<std::size_t>(l)].word_pauli;
  if (!pj || !pl)
    throw validation_error(
        "symbolic Pauli route requires Pauli generator words");
  const StabilizerGroup& group = *policy.group;
  if (group.qubits() != pj->qubits())
    throw validation_error("stabilizer group qubit count mismatch");
  const Vector& base = basis.base().amplitudes();
  for (const PauliString& s : group.generators()) {
    Vector image = s.dense().mat() * base;
    if ((image - base).norm() > 1e-8)
      throw validation_error("stabilizer group does not fix the base state");
  }
  return stabilizer_outer_decompose(group, *pj, *pl, c, std::move(target_id));
}

inline Decomposition route_wigner(const NeighborhoodBasis& basis, int j,
                                  int l, int c,
                                  const MeasurementFamily& family,
                                  const RoutePolicy& policy,
                                  std::string target_id) {
  const HilbertSpec& spec = family.hilbert();
  if (spec.kind() != HilbertSpec::Kind::bosonic)
    throw validation_error("phase-space route requires a bosonic family");
  if (spec.dimension() != basis.base().dim())
    throw validation_error("family dimension does not match the basis");
  DenseOperator element = element_operator(basis, j, l, c);

  // A mode is peelable when every entry touching an occupied digit on
  // that mode vanishes; the element then factors as (vacuum projector on
  // the mode) x (rest), and the mode only needs a vacuum check.
  int total = spec.sites();
  int digits = spec.cutoff();
  Eigen::Index d = element.dim();
  double tol = kVacuumPeelTol *
               std::max(element.mat().cwiseAbs().maxCoeff(), 1.0);
  std::vector<Eigen::Index> stride(static_cast<std::size_t>(total), 1);
  for (int i = total - 2; i >= 0; --i)
    stride[static_cast<std::size_t>(i)] =
        stride[static_cast<std::size_t>(i + 1)] * digits;
  std::vector<int> active;
  for (int mode = 0; mode < total; ++mode) {
    Eigen::Index s = stride[static_cast<std::size_t>(mode)];
    bool peelable = true;
    for (Eigen::Index x = 0; x < d && peelable; ++x)
      for (Eigen::Index y = 0; y < d; ++y) {
        bool occupied = ((x / s) % digits) != 0 || ((y / s) % digits) != 0;
        if (occupied && std::abs(element.mat()(x, y)) > tol) {
          peelable = false;
          break;
        }
      }
    if (!peelable) active.push_back(mode);
  }
  if (active.empty()) active.push_back(0);  // global vacuum projector

  if (static_cast<int>(active.size()) == total)
    return wigner_decompose(element, spec, policy.grid,
                            policy.wigner_residual_threshold,
                            std::move(target_id));

  Eigen::Index d_red = 1;
  for (std::size_t i = 0; i < active.size(); ++i) d_red *= digits;
  std::vector<Eigen::Index> lift(static_cast<std::size_t>(d_red), 0);
  for (Eigen::Index xr = 0; xr < d_red; ++xr) {
    Eigen::Index rem = xr;
    Eigen::Index full = 0;
    for (std::size_t a = active.size(); a-- > 0;) {
      full += (rem % digits) * stride[static_cast<std::size_t>(active[a])];
      rem /= digits;
    }
    lift[static_cast<std::size_t>(xr)] = full;
  }
  Matrix reduced(d_red, d_red);
  for (Eigen::Index xr = 0; xr < d_red; ++xr)
    for (Eigen::Index yr = 0; yr < d_red; ++yr)
      reduced(xr, yr) = element.mat()(lift[static_cast<std::size_t>(xr)],
                                      lift[static_cast<std::size_t>(yr)]);
  return wigner_decompose_embedded(DenseOperator(std::move(reduced)), active,
                                   spec, policy.grid,
                                   policy.wigner_residual_threshold,
                                   std::move(target_id));
}

/// Product of generator matrices along a word, first letter applied
/// first. Every letter must be unitary for the result to serve as a
/// branch-circuit control.
inline Matrix word_unitary(const GeneratorSet& gens,
                           const std::vector<std::size_t>& word,
                           Eigen::Index dim) {
  Matrix w = Matrix::Identity(dim, dim);
  for (std::size_t idx : word) {
    const Generator& g = gens.at(idx);
    if (!g.is_unitary)
      throw validation_error(
          "branch expansion requires unitary generator words");
    w = (g.op.mat() * w).eval();
  }
  return w;
}

inline Decomposition route_hadamard(const NeighborhoodBasis& basis, int j,
                                    int l, int c,
                                    const MeasurementFamily& family,
                                    const RoutePolicy& policy,
                                    std::string target_id) {
  if (!policy.generators)
    throw validation_error("branch-expanded route needs the generator set");
  if (family.kind() != MeasurementFamily::Kind::finite)
    throw validation_error("branch-expanded route needs a finite family");
  const GeneratorSet& gens = *policy.generators;
  Eigen::Index dim = basis.base().dim();
  if (gens.dim() != dim)
    throw validation_error("generator dimension does not match the basis");

  const Matrix& coeffs = basis.coeffs();
  std::set<std::size_t> support_j, support_l;
  for (std::size_t a = 0; a < basis.raw().size(); ++a) {
    if (std::abs(coeffs(static_cast<Eigen::Index>(a), j)) >
        kElementSupportTol)
      support_j.insert(a);
    if (std::abs(coeffs(static_cast<Eigen::Index>(a), l)) >
        kElementSupportTol)
      support_l.insert(a);
  }

  std::map<std::size_t, Matrix> words;
  auto word_of = [&](std::size_t a) -> const Matrix& {
    auto it = words.find(a);
    if (it == words.end())
      it = words
               .emplace(a, word_unitary(
                               gens, basis.raw()[a].word, dim))
               .first;
    return it->second;
  };

  std::vector<MeasurementRef> entries;
  std::set<std::string> seen;
  auto add = [&](MeasurementRef ref) {
    if (seen.insert(ref.id()).second) entries.push_back(std::move(ref));
  };
  std::vector<MeasurementPtr> seeds;
  for (std::size_t i = 0; i < family.size(); ++i) {
    MeasurementRef ref = family.at(i);
    seeds.push_back(ref.get());
    add(std::move(ref));
  }
  // The identity observable rides along the branch circuits so the
  // constant part of W_a I W_b^dag + h.c. is reachable too.
  seeds.push_back(identity_measurement(family.hilbert()));

  for (std::size_t a : support_j)
    for (std::size_t b : support_l) {
      if (a == b) {
        if (basis.raw()[a].word.empty()) continue;
        Matrix v = word_of(a).adjoint();
        for (const MeasurementPtr& seed : seeds) {
          if (seed->effects().size() == 1) continue;  // identity observable
          add(MeasurementRef(conjugate_measurement(seed, v)));
        }
        continue;
      }
      // Branch difference of control U equals U^dag O + O U; with
      // U = W_a^dag W_b, conjugating by W_b afterwards brackets
      // W_a O W_b^dag + h.c.; the -iU control covers the i(..) - h.c.
      // combination.
      Matrix u_re = word_of(a).adjoint() * word_of(b);
      Matrix u_im = Complex(0.0, -1.0) * u_re;
      Matrix v = word_of(b).adjoint();
      bool conjugate_needed = !basis.raw()[b].word.empty();
      for (const MeasurementPtr& seed : seeds)
        for (const Matrix* u : {&u_re, &u_im})
          for (int sign : {1, -1}) {
            MeasurementPtr branch =
                hadamard_expand(seed, {*u}, {sign});
            if (conjugate_needed)
              branch = conjugate_measurement(branch, v);
            add(MeasurementRef(std::move(branch)));
          }
    }

  MeasurementFamily expanded = MeasurementFamily::finite_list(
      family.name() + "+branches:" + target_id, family.hilbert(),
      std::move(entries));
  return l1_min_decompose(element_operator(basis, j, l, c), expanded,
                          policy.lp_tol, std::move(target_id),
                          policy.dictionary_cap);
}

}  // namespace detail

/// Decomposition of the (j, l, c) element operator over the family,
/// using the policy's route. The returned target id is stable, so the
/// per-element sampling streams are independent and reproducible.
inline Decomposition element_route(const NeighborhoodBasis& basis, int j,
                                   int l, int c,
                                   const MeasurementFamily& family,
                                   const RoutePolicy& policy) {
  detail::check_element_indices(basis, j, l, c);
  std::string target_id = element_target_id(j, l, c);
  switch (policy.route) {
    case ElementRoute::analytic_pauli:
      return detail::route_analytic(basis, j, l, c, policy,
                                    std::move(target_id));
    case ElementRoute::lp_over_family:
      return l1_min_decompose(element_operator(basis, j, l, c), family,
                              policy.lp_tol, std::move(target_id),
                              policy.dictionary_cap);
    case ElementRoute::wigner_grid:
      return detail::route_wigner(basis, j, l, c, family, policy,
                                  std::move(target_id));
    case ElementRoute::hadamard_expanded_lp:
      return detail::route_hadamard(basis, j, l, c, family, policy,
                                    std::move(target_id));
  }
  throw validation_error("unknown element route");
}

/// Everything needed to reproduce one tomography run. The sample-count
/// matrix is indexed like the estimate: diagonal entries drive the
/// population estimates, entry (j, l) above the diagonal the real
/// combination of (j, l), and entry (l, j) below it the imaginary one.
struct TomographyPlan {
  NeighborhoodBasis basis;
  MeasurementFamily family;
  RoutePolicy policy{};
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> samples;
  std::uint64_t seed = 0;
};

/// Assembled estimate. `rho_hat` is Hermitian by construction and not
/// renormalized. `stderr_matrix` holds the standard error of the
/// population estimates on the diagonal, of Re(rho_hat(j, l)) above it,
/// and of Im(rho_hat(j, l)) below it; `z_matrix` holds the decomposition
/// costs in the same layout (un-halved, i.e. the cost of the sampled
/// combination).
struct TomographyResult {
  Matrix rho_hat;
  Eigen::MatrixXd stderr_matrix;
  Eigen::MatrixXd z_matrix;
  double trace_estimate = 0.0;
  std::int64_t total_samples = 0;
  std::string diagonal_offset_note = kDiagonalOffsetNote;
};

struct TomographyRunOptions {
  int workers = 1;
};

/// Consistency summary: the population estimate and its one-sigma
/// radius, combined from the diagonal standard errors in quadrature.
struct TraceCheck {
  double trace_estimate = 0.0;
  double ci = 0.0;
};

inline TraceCheck self_verify(const TomographyResult& result) {
  TraceCheck out;
  out.trace_estimate = result.trace_estimate;
  double s = 0.0;
  for (Eigen::Index i = 0; i < result.stderr_matrix.rows(); ++i)
    s += result.stderr_matrix(i, i) * result.stderr_matrix(i, i);
  out.ci = std::sqrt(s);
  return out;
}

/// Runs the element estimates of `plan` against `source` and assembles
/// the matrix. Elements run concurrently when workers > 1; the estimate
/// is bitwise identical for any worker count because every element owns
/// a counter-based stream keyed by its stable target id.
inline TomographyResult run_tomography(const TomographyPlan& plan,
                                       const PhysicalStateSource& source,
                                       const TomographyRunOptions& options =
                                           TomographyRunOptions{}) {
  int rank = plan.basis.rank();
  if (plan.samples.rows() != rank || plan.samples.cols() != rank)
    throw validation_error("sample-count matrix must be rank x rank");
  for (Eigen::Index a = 0; a < plan.samples.rows(); ++a)
    for (Eigen::Index b = 0; b < plan.samples.cols(); ++b)
      if (plan.samples(a, b) < 1)
        throw validation_error("every element needs at least one sample");
  if (source.dim() != plan.basis.base().dim())
    throw validation_error("source dimension does not match the basis");

  struct Task {
    int j, l, c;
    std::int64_t t;
  };
  std::vector<Task> tasks;
  for (int j = 0; j < rank; ++j)
    tasks.push_back(Task{j, j, 0, plan.samples(j, j)});
  for (int j = 0; j < rank; ++j)
    for (int l = j + 1; l < rank; ++l) {
      tasks.push_back(Task{j, l, 0, plan.samples(j, l)});
      tasks.push_back(Task{j, l, 1, plan.samples(l, j)});
    }

  std::vector<EstimatorResult> estimates(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  auto run_task = [&](std::size_t i) {
    const Task& task = tasks[i];
    try {
      Decomposition decomp = element_route(plan.basis, task.j, task.l,
                                           task.c, plan.family, plan.policy);
      SamplerOptions sampler_options;
      sampler_options.seed = plan.seed;
      sampler_options.workers = 1;
      estimates[i] = dfe_estimate(source, decomp, task.t, sampler_options);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };

  int workers = options.workers;
  if (workers == 0)
    workers = static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min<int>(workers, static_cast<int>(tasks.size()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < tasks.size(); ++i) run_task(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) return;
          run_task(i);
        }
      });
    for (std::thread& th : pool) th.join();
  }

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (!failures[i]) continue;
    const Task& task = tasks[i];
    std::string where = "element (" + std::to_string(task.j) + ", " +
                        std::to_string(task.l) + ", c=" +
                        std::to_string(task.c) + "): ";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const infeasible_error& e) {
      throw infeasible_error(where + e.what());
    } catch (const std::exception& e) {
      throw validation_error(where + e.what());
    }
  }

  TomographyResult out;
  out.rho_hat = Matrix::Zero(rank, rank);
  out.stderr_matrix = Eigen::MatrixXd::Zero(rank, rank);
  out.z_matrix = Eigen::MatrixXd::Zero(rank, rank);
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    const Task& task = tasks[i];
    const EstimatorResult& est = estimates[i];
    out.total_samples += task.t;
    if (task.j == task.l) {
      out.rho_hat(task.j, task.j) = Complex(est.mean, 0.0);
      out.stderr_matrix(task.j, task.j) = est.stderr_of_mean;
      out.z_matrix(task.j, task.j) = est.z;
    } else if (task.c == 0) {
      out.rho_hat(task.j, task.l) += Complex(0.5 * est.mean, 0.0);
      out.rho_hat(task.l, task.j) += Complex(0.5 * est.mean, 0.0);
      out.stderr_matrix(task.j, task.l) = 0.5 * est.stderr_of_mean;
      out.z_matrix(task.j, task.l) = est.z;
    } else {
      out.rho_hat(task.j, task.l) += Complex(0.0, 0.5 * est.mean);
      out.rho_hat(task.l, task.j) += Complex(0.0, -0.5 * est.mean);
      out.stderr_matrix(task.l, task.j) = 0.5 * est.stderr_of_mean;
      out.z_matrix(task.l, task.j) = est.z;
    }
  }
  for (int j = 0; j < rank; ++j)
    out.trace_estimate += out.rho_hat(j, j).real();
  return out;
}

/// Decomposition cost of every element estimate, laid out like the
/// sample-count matrix: diagonal Z on the diagonal, real-combination Z
/// above it, imaginary-combination Z below it.
inline Eigen::MatrixXd element_costs(const NeighborhoodBasis& basis,
                                     const MeasurementFamily& family,
                                     const RoutePolicy& policy) {
  int rank = basis.rank();
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(rank, rank);
  for (int j = 0; j < rank; ++j)
    z(j, j) = element_route(basis, j, j, 0, family, policy).z();
  for (int j = 0; j < rank; ++j)
    for (int l = j + 1; l < rank; ++l) {
      z(j, l) = element_route(basis, j, l, 0, family, policy).z();
      z(l, j) = element_route(basis, j, l, 1, family, policy).z();
    }
  return z;
}

/// Splits a global sample budget across the element estimates in
/// proportion to Z^2 (variance-optimal for a shared accuracy target),
/// flooring every count at one sample.
inline Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>
allocate_budget(const Eigen::MatrixXd& z, std::int64_t total) {
  Eigen::Index rank = z.rows();
  if (rank == 0 || z.cols() != rank)
    throw validation_error("cost matrix must be square and nonempty");
  if (total < rank * rank)
    throw validation_error("budget smaller than one sample per element");
  double weight_sum = z.array().square().sum();
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> t(rank, rank);
  for (Eigen::Index a = 0; a < rank; ++a)
    for (Eigen::Index b = 0; b < rank; ++b) {
      double share = weight_sum > 0.0
                         ? z(a, b) * z(a, b) / weight_sum
                         : 1.0 / static_cast<double>(rank * rank);
      t(a, b) = std::max<std::int64_t>(
          1, static_cast<std::int64_t>(
                 std::llround(static_cast<double>(total) * share)));
    }
  return t;
}

/// Closest matrix (in Frobenius norm) that is positive semidefinite
/// with the given trace: shift the spectrum to the target trace, then
/// repeatedly zero the most negative eigenvalue and spread its mass
/// uniformly over the eigenvalues not yet pinned to zero.
inline Matrix nearest_physical(const Matrix& rho_hat, double target_trace) {
  if (rho_hat.rows() == 0 || rho_hat.rows() != rho_hat.cols())
    throw validation_error("square nonempty matrix required");
  if (!std::isfinite(target_trace) || target_trace < 0.0)
    throw validation_error("target trace must be finite and nonnegative");
  if ((rho_hat - rho_hat.adjoint()).cwiseAbs().maxCoeff() > 1e-8)
    throw validation_error("nearest_physical requires a Hermitian matrix");
  Matrix h = 0.5 * (rho_hat + rho_hat.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success)
    throw validation_error("eigendecomposition failed");
  Eigen::VectorXd lam = es.eigenvalues();
  Eigen::Index d = lam.size();
  lam.array() += (target_trace - lam.sum()) / static_cast<double>(d);
  std::vector<char> pinned(static_cast<std::size_t>(d), 0);
  while (true) {
    Eigen::Index worst = -1;
    double most_negative = 0.0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (!pinned[static_cast<std::size_t>(i)] && lam(i) < most_negative) {
        most_negative = lam(i);
        worst = i;
      }
    if (worst < 0) break;
    pinned[static_cast<std::size_t>(worst)] = 1;
    lam(worst) = 0.0;
    Eigen::Index remaining = 0;
    for (Eigen::Index i = 0; i < d; ++i)
      if (!pinned[static_cast<std::size_t>(i)]) ++remaining;
    if (remaining == 0) break;
    for (Eigen::Index i = 0; i < d; ++i)
      if (!pinned[static_cast<std::size_t>(i)])
        lam(i) += most_negative / static_cast<double>(remaining);
  }
  Matrix out = es.eigenvectors() * lam.asDiagonal() *
               es.eigenvectors().adjoint();
  return 0.5 * (out + Matrix(out.adjoint()));
}

}  // namespace demesst
