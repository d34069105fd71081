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

// Measurement-contrast machinery: a score for how well one measurement
// reads out the traceless part of a target while staying non-positive
// on a chosen deviation direction, an iterative construction that turns
// such a score into an explicit measurement ensemble whose weighted
// observable converges to the target, and the concrete five-measurement
// local family for two-qubit Schmidt states that feeds it.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/measurement.hpp"

namespace demesst {

/// Deviations must stay orthogonal to both I and the traceless target.
inline constexpr double kContrastOrthTol = 1e-10;
/// Slack when testing the oracle contract inequalities.
inline constexpr double kContrastOracleTol = 1e-12;
/// Below this squared norm a deviation increment counts as exactly zero
/// (the returned measurement is proportional to the traceless target).
inline constexpr double kContrastExactTol = 1e-24;
/// The five-measurement family must reproduce its closure identity to
/// this precision or the construction is wrong.
inline constexpr double kLoccIdentityTol = 1e-12;

namespace detail {

/// Hilbert-Schmidt inner product tr(a^dag b), real part. All call
/// sites pass Hermitian matrices, for which the product trace is real.
inline double hs_inner(const Matrix& a, const Matrix& b) {
  return a.conjugate().cwiseProduct(b).sum().real();
}

/// o - tr(o)/D * I. Throws if the remainder vanishes: a target that is
/// a multiple of the identity has nothing to estimate.
inline Matrix traceless_or_throw(const DenseOperator& o) {
  if (!o.is_hermitian())
    throw validation_error("contrast target must be Hermitian");
  Eigen::Index d = o.dim();
  Matrix out =
      o.mat() - (o.mat().trace() / static_cast<double>(d)) *
                    Matrix::Identity(d, d);
  if (out.squaredNorm() <= kContrastExactTol)
    throw validation_error(
        "contrast target has no traceless part (multiple of identity)");
  return out;
}

/// (M - tr(M)/D I) / (lambda_max - lambda_min): the unit-range
/// traceless observable of a measurement.
inline Matrix normalized_observable(const MeasurementOperator& meas) {
  if (meas.range() <= 0.0)
    throw validation_error(
        "measurement assigns a single value to every outcome");
  Eigen::Index d = meas.dim();
  Matrix m = meas.observable().mat();
  return (m - (m.trace() / static_cast<double>(d)) *
                  Matrix::Identity(d, d)) /
         meas.range();
}

}  // namespace detail

/// Score of one measurement against a Hermitian target given a
/// deviation direction: zero whenever the measurement leans into the
/// deviation (after projecting the deviation off I and the traceless
/// target), otherwise the overlap with the traceless target per unit of
/// outcome range.
inline double effective_contrast(const DenseOperator& o,
                                 const MeasurementOperator& meas,
                                 const DenseOperator& varsigma) {
  if (!varsigma.is_hermitian())
    throw validation_error("deviation operator must be Hermitian");
  if (o.dim() != meas.dim() || o.dim() != varsigma.dim())
    throw validation_error("contrast operands differ in dimension");
  if (meas.range() <= 0.0)
    throw validation_error(
        "measurement assigns a single value to every outcome");
  Eigen::Index d = o.dim();
  Matrix otil = detail::traceless_or_throw(o);
  const Matrix& s = varsigma.mat();
  Matrix stil = s -
                (s.trace() / static_cast<double>(d)) *
                    Matrix::Identity(d, d) -
                (detail::hs_inner(s, otil) / otil.squaredNorm()) * otil;
  const Matrix& m = meas.observable().mat();
  if (detail::hs_inner(m, stil) > 0.0) return 0.0;
  return detail::hs_inner(m, otil) / meas.range();
}

/// One accepted measurement with its ensemble weight and its overlap
/// tr(M~ O~) with the unit-range traceless target observable.
struct WeightedMeasurement {
  MeasurementOperator meas;
  double weight = 0.0;
  double aligned_overlap = 0.0;
};

/// Outcome of the iterative ensemble construction. `deviation` is the
/// gap between the weighted normalized observable and its projection
/// onto the traceless target; histories are indexed by step (entry k
/// describes the state after step k+1).
struct ContrastState {
  int step = 0;
  DenseOperator deviation;
  std::vector<WeightedMeasurement> ensemble;
  std::vector<double> deviation_norm_history;
  std::vector<double> delta_norm_history;
  std::vector<double> implied_z_history;
  /// Squared Frobenius norm of the traceless target.
  double target_norm2 = 0.0;
  /// Sum of weight * aligned_overlap over the ensemble.
  double aligned_mean = 0.0;

  /// One-norm the ensemble certifies for estimating the target:
  /// target_norm2 / aligned_mean.
  double implied_z() const {
    if (aligned_mean <= 0.0)
      throw validation_error("ensemble has no aligned weight");
    return target_norm2 / aligned_mean;
  }
};

using MeasurementOracle =
    std::function<MeasurementOperator(const DenseOperator&)>;

/// Builds a measurement ensemble whose weighted unit-range observable
/// converges to (a positive multiple of) the traceless target. Each
/// step asks the oracle for a measurement aligned with the target and
/// non-positive on the current deviation, then picks the reweighting
/// that minimizes the new deviation norm; the inverse squared norms
/// then add up, giving deviation norm < sqrt(D/n) after n steps. A
/// returned measurement exactly proportional to the traceless target
/// collapses the ensemble to that single measurement and stops.
inline ContrastState iterative_ensemble(const DenseOperator& o,
                                        const MeasurementOracle& oracle,
                                        int n_max) {
  if (!oracle) throw validation_error("oracle must be callable");
  if (n_max < 1) throw validation_error("need at least one iteration");
  Matrix otil = detail::traceless_or_throw(o);
  double onorm2 = otil.squaredNorm();
  Eigen::Index d = o.dim();

  ContrastState st;
  st.target_norm2 = onorm2;
  Matrix sig = Matrix::Zero(d, d);
  double signorm2 = 0.0;

  for (int n = 1; n <= n_max; ++n) {
    MeasurementOperator m = oracle(DenseOperator(sig));
    if (m.dim() != d)
      throw validation_error("oracle measurement dimension mismatch");
    Matrix mtil = detail::normalized_observable(m);
    double y = detail::hs_inner(mtil, otil);
    if (y <= kContrastOracleTol)
      throw infeasible_error(
          "oracle contract broken at step " + std::to_string(n) +
          ": target overlap " + std::to_string(y) + " is not positive");
    double cross = detail::hs_inner(sig, mtil);
    if (cross > kContrastOracleTol)
      throw infeasible_error(
          "oracle contract broken at step " + std::to_string(n) +
          ": deviation overlap " + std::to_string(cross) +
          " is positive");

    Matrix delta = mtil - (y / onorm2) * otil;
    double dnorm2 = delta.squaredNorm();
    bool exact = dnorm2 <= kContrastExactTol;
    double p;
    if (exact) {
      // Proportional hit: the single measurement is the whole answer.
      st.ensemble.clear();
      st.aligned_mean = 0.0;
      p = 1.0;
    } else if (st.ensemble.empty()) {
      p = 1.0;
    } else {
      // Minimizer of ||p delta + (1-p) sig||^2 given the non-positive
      // cross term.
      p = signorm2 / (dnorm2 + signorm2);
    }

    for (WeightedMeasurement& wm : st.ensemble) wm.weight *= (1.0 - p);
    st.aligned_mean = (1.0 - p) * st.aligned_mean + p * y;
    st.ensemble.push_back(WeightedMeasurement{std::move(m), p, y});
    sig = (p * delta + (1.0 - p) * sig).eval();
    signorm2 = sig.squaredNorm();
    st.step = n;
    st.deviation_norm_history.push_back(std::sqrt(signorm2));
    st.delta_norm_history.push_back(std::sqrt(dnorm2));
    st.implied_z_history.push_back(onorm2 / st.aligned_mean);

    double drift = std::abs(sig.trace()) / static_cast<double>(d) +
                   std::abs(detail::hs_inner(sig, otil)) /
                       std::max(1.0, onorm2);
    if (drift > kContrastOrthTol)
      throw validation_error(
          "ensemble deviation drifted off the orthogonal slice");
    if (exact) break;
  }

  double weight_sum = 0.0;
  for (const WeightedMeasurement& wm : st.ensemble)
    weight_sum += wm.weight;
  if (std::abs(weight_sum - 1.0) > 1e-12)
    throw validation_error("ensemble weights do not sum to one");
  st.deviation = DenseOperator(Matrix(0.5 * (sig + sig.adjoint())));
  return st;
}

/// sqrt(lambda)|00> + sqrt(1-lambda)|11>, lambda in [1/2, 1]. Any
/// two-qubit pure state reduces to this form under local unitaries.
inline PureState two_qubit_schmidt_state(double lambda) {
  if (!(lambda >= 0.5 && lambda <= 1.0))
    throw validation_error("Schmidt weight must lie in [1/2, 1]");
  Vector v = Vector::Zero(4);
  v(0) = std::sqrt(lambda);
  v(3) = std::sqrt(1.0 - lambda);
  return PureState(std::move(v));
}

namespace detail {

inline Matrix rank1(const Vector& v) { return v * v.adjoint(); }

inline MeasurementRef locc_projective(std::string id, Matrix p) {
  Eigen::Index d = p.rows();
  std::vector<DenseOperator> effects;
  effects.emplace_back(Matrix(p));
  effects.emplace_back(Matrix(Matrix::Identity(d, d) - p));
  return MeasurementRef(std::make_shared<const MeasurementOperator>(
      std::move(id), std::move(effects), std::vector<double>{1.0, 0.0},
      RealizationTag::custom));
}

}  // namespace detail

/// The five local measurements for a two-qubit Schmidt state: match
/// both bits, or measure X (or Y) on one qubit and project the other
/// onto the state conditioned on that outcome. Each is a yes/no
/// projector with unit outcome range, and together they close over the
/// state projector: (2 M_match + sum of the four) / 6 = (2 P + I) / 3.
/// That identity is re-verified on every construction.
inline MeasurementFamily two_qubit_locc_family(double lambda) {
  PureState psi = two_qubit_schmidt_state(lambda);
  double a = std::sqrt(lambda);
  double b = std::sqrt(1.0 - lambda);

  Vector zero2(2), one2(2);
  zero2 << 1.0, 0.0;
  one2 << 0.0, 1.0;
  double r = 1.0 / std::sqrt(2.0);
  Vector plus = r * (zero2 + one2);
  Vector minus = r * (zero2 - one2);
  Vector plus_i = r * (zero2 + Complex(0.0, 1.0) * one2);
  Vector minus_i = r * (zero2 - Complex(0.0, 1.0) * one2);
  // States of the partner qubit conditioned on the +/- (or +i/-i)
  // outcome of the probed qubit.
  Vector cond_plus = a * zero2 + b * one2;
  Vector cond_minus = a * zero2 - b * one2;
  Vector cond_plus_i = a * zero2 - Complex(0.0, 1.0) * b * one2;
  Vector cond_minus_i = a * zero2 + Complex(0.0, 1.0) * b * one2;

  using detail::rank1;
  Matrix m_match = Matrix::Zero(4, 4);
  m_match(0, 0) = 1.0;
  m_match(3, 3) = 1.0;
  Matrix m_x1 = rank1(tensor_product(plus, cond_plus)) +
                rank1(tensor_product(minus, cond_minus));
  Matrix m_x2 = rank1(tensor_product(cond_plus, plus)) +
                rank1(tensor_product(cond_minus, minus));
  Matrix m_y1 = rank1(tensor_product(plus_i, cond_plus_i)) +
                rank1(tensor_product(minus_i, cond_minus_i));
  Matrix m_y2 = rank1(tensor_product(cond_plus_i, plus_i)) +
                rank1(tensor_product(cond_minus_i, minus_i));

  Matrix closure = (2.0 * m_match + m_x1 + m_x2 + m_y1 + m_y2) / 6.0;
  Matrix expected =
      (2.0 * psi.projector().mat() + Matrix::Identity(4, 4)) / 3.0;
  if ((closure - expected).cwiseAbs().maxCoeff() > kLoccIdentityTol)
    throw validation_error(
        "two-qubit local family closure identity failed; "
        "construction is inconsistent");

  char buf[48];
  std::snprintf(buf, sizeof buf, "lam=%.12g", lambda);
  std::string suffix(buf);
  std::vector<MeasurementRef> entries;
  entries.push_back(
      detail::locc_projective("locc2:z:" + suffix, std::move(m_match)));
  entries.push_back(
      detail::locc_projective("locc2:x1:" + suffix, std::move(m_x1)));
  entries.push_back(
      detail::locc_projective("locc2:x2:" + suffix, std::move(m_x2)));
  entries.push_back(
      detail::locc_projective("locc2:y1:" + suffix, std::move(m_y1)));
  entries.push_back(
      detail::locc_projective("locc2:y2:" + suffix, std::move(m_y2)));
  return MeasurementFamily::finite_list("locc2:" + suffix,
                                        HilbertSpec::qubits(2),
                                        std::move(entries));
}

/// Exhaustive-search oracle over a finite family plus the complement of
/// every member (same effects, values flipped, so the observable turns
/// into I - M). Given a deviation it returns, among candidates whose
/// normalized observable has positive overlap with the traceless target
/// and non-positive overlap with the (projected) deviation, the one
/// with the largest target overlap; ties go to the earliest candidate.
inline MeasurementOracle make_locc_oracle(const DenseOperator& target,
                                          const MeasurementFamily& family) {
  Matrix otil = detail::traceless_or_throw(target);
  if (family.hilbert().dimension() != target.dim())
    throw validation_error("family dimension does not match the target");

  struct Candidate {
    MeasurementOperator meas;
    Matrix normalized;
    double target_overlap;
  };
  auto pool = std::make_shared<std::vector<Candidate>>();
  for (const MeasurementRef& ref : family.entries()) {
    MeasurementPtr m = ref.get();
    Matrix mtil = detail::normalized_observable(*m);
    pool->push_back(
        Candidate{*m, mtil, detail::hs_inner(mtil, otil)});
    std::vector<double> flipped = m->values();
    for (double& v : flipped) v = m->lambda_max() + m->lambda_min() - v;
    MeasurementOperator comp(m->id() + ":flip", m->effects(),
                             std::move(flipped), m->tag());
    Matrix ctil = detail::normalized_observable(comp);
    double cy = detail::hs_inner(ctil, otil);
    pool->push_back(Candidate{std::move(comp), std::move(ctil), cy});
  }

  double onorm2 = otil.squaredNorm();
  Eigen::Index d = target.dim();
  return [pool, otil, onorm2, d](const DenseOperator& varsigma) {
    if (!varsigma.is_hermitian())
      throw validation_error("deviation operator must be Hermitian");
    if (varsigma.dim() != d)
      throw validation_error("deviation dimension mismatch");
    const Matrix& s = varsigma.mat();
    Matrix stil = s -
                  (s.trace() / static_cast<double>(d)) *
                      Matrix::Identity(d, d) -
                  (detail::hs_inner(s, otil) / onorm2) * otil;
    const Candidate* best = nullptr;
    for (const Candidate& c : *pool) {
      if (c.target_overlap <= kContrastOracleTol) continue;
      if (detail::hs_inner(stil, c.normalized) > kContrastOracleTol)
        continue;
      if (best == nullptr ||
          c.target_overlap > best->target_overlap + kContrastOracleTol)
        best = &c;
    }
    if (best == nullptr)
      throw infeasible_error(
          "no candidate measurement satisfies the contract for this "
          "deviation");
    return best->meas;
  };
}

/// Tab-separated convergence trace: one row per step with the deviation
/// norm and the one-norm the ensemble certifies so far.
inline std::string convergence_trace_tsv(const ContrastState& st) {
  std::string out = "step\tdeviation_norm\timplied_z\n";
  char buf[96];
  for (std::size_t i = 0; i < st.deviation_norm_history.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu\t%.12g\t%.12g\n", i + 1,
                  st.deviation_norm_history[i], st.implied_z_history[i]);
    out += buf;
  }
  return out;
}

}  // namespace demesst
