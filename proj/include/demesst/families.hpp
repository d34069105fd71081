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

/// \file families.hpp
/// The two qubit-register measurement families: the 4^m - 1 nontrivial
/// Hermitian Pauli measurements (lazily enumerated) and tensor products
/// of arbitrary per-site local observables.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/measurement.hpp"
#include "demesst/pauli.hpp"

namespace demesst {

/// Measurement of the Hermitian Pauli string P: effects (I +- P)/2,
/// values +-1, range 2.
inline MeasurementPtr pauli_measurement(const PauliString& p) {
  if (!p.is_hermitian())
    throw validation_error("pauli measurement requires a Hermitian string");
  Matrix dense = p.dense().mat();
  int d = static_cast<int>(dense.rows());
  Matrix id = Matrix::Identity(d, d);
  std::vector<DenseOperator> effects;
  effects.emplace_back(Matrix(0.5 * (id + dense)));
  effects.emplace_back(Matrix(0.5 * (id - dense)));
  return std::make_shared<MeasurementOperator>(
      p.to_string(), std::move(effects), std::vector<double>{1.0, -1.0},
      RealizationTag::pauli);
}

inline MeasurementRef pauli_measurement_ref(const PauliString& p) {
  return MeasurementRef(p.to_string(), 2.0,
                        [p] { return pauli_measurement(p); });
}

/// All 4^m - 1 nontrivial Hermitian Pauli measurements, enumerated
/// lazily so large m never materializes dense matrices up front.
inline MeasurementFamily pauli_family(int m) {
  if (m < 1 || m > 12)
    throw validation_error("pauli_family: m must be in [1, 12]");
  long long count = 1;
  for (int i = 0; i < m; ++i) count *= 4;
  return MeasurementFamily::finite(
      "pauli:m=" + std::to_string(m), HilbertSpec::qubits(m),
      static_cast<std::size_t>(count - 1), [m](std::size_t i) {
        return pauli_measurement_ref(
            PauliString::from_family_index(m, static_cast<long long>(i) + 1));
      });
}

/// Trivial one-outcome measurement: effect I, value 1. Useful as a
/// dictionary atom standing for "accept every shot".
inline MeasurementPtr identity_measurement(const HilbertSpec& spec) {
  std::vector<DenseOperator> effects{DenseOperator::identity(spec.dimension())};
  return std::make_shared<MeasurementOperator>(
      "id:d=" + std::to_string(spec.dimension()), std::move(effects),
      std::vector<double>{1.0}, RealizationTag::custom);
}

/// A labeled single-site observable used to assemble product
/// measurements.
struct LocalObservable {
  std::string label;
  DenseOperator op;
};

namespace detail {

struct LocalSpectrum {
  std::vector<double> values;
  std::vector<Matrix> projectors;  // degenerate eigenvalues merged
};

inline LocalSpectrum local_spectrum(const DenseOperator& op) {
  if (!op.is_hermitian())
    throw validation_error("product family local must be Hermitian");
  Eigen::SelfAdjointEigenSolver<Matrix> es(op.mat());
  LocalSpectrum out;
  const Eigen::VectorXd& ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    Matrix proj =
        es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
    if (!out.values.empty() && std::abs(ev(i) - out.values.back()) <= 1e-10) {
      out.projectors.back() += proj;
    } else {
      out.values.push_back(ev(i));
      out.projectors.push_back(std::move(proj));
    }
  }
  // Snap near-integer eigenvalues (projector locals produce 1 +- 1e-16).
  for (double& v : out.values) {
    double r = std::round(v);
    if (std::abs(v - r) <= 1e-12) v = r;
  }
  return out;
}

}  // namespace detail

/// Measurement reading out a Hermitian observable through its spectral
/// decomposition: effects are eigenprojectors (degenerate eigenvalues
/// merged within 1e-10), values are the eigenvalues.
inline MeasurementPtr spectral_measurement(
    std::string id, const DenseOperator& op,
    RealizationTag tag = RealizationTag::custom) {
  detail::LocalSpectrum sp = detail::local_spectrum(op);
  std::vector<DenseOperator> effects;
  effects.reserve(sp.projectors.size());
  for (auto& p : sp.projectors) effects.emplace_back(std::move(p));
  return std::make_shared<MeasurementOperator>(
      std::move(id), std::move(effects), std::move(sp.values), tag);
}

/// One product measurement from a chosen local per site: effects are
/// tensor products of local eigenprojectors, values are products of
/// local eigenvalues, and outcomes with equal values are merged.
inline MeasurementPtr product_measurement(
    const std::vector<LocalObservable>& locals) {
  if (locals.empty()) throw validation_error("product measurement: no sites");
  std::string id;
  std::vector<detail::LocalSpectrum> spectra;
  for (std::size_t s = 0; s < locals.size(); ++s) {
    if (!id.empty()) id += "|";
    id += "site" + std::to_string(s) + "=" + locals[s].label;
    spectra.push_back(detail::local_spectrum(locals[s].op));
  }
  // Expand the outcome lattice site by site, merging equal values as we
  // go to keep the effect count near the distinct-value count.
  std::vector<double> values{1.0};
  std::vector<Matrix> effects{Matrix::Identity(1, 1)};
  for (const auto& sp : spectra) {
    std::vector<double> nv;
    std::vector<Matrix> ne;
    for (std::size_t a = 0; a < values.size(); ++a) {
      for (std::size_t b = 0; b < sp.values.size(); ++b) {
        double v = values[a] * sp.values[b];
        Matrix e(effects[a].rows() * sp.projectors[b].rows(),
                 effects[a].cols() * sp.projectors[b].cols());
        for (Eigen::Index i = 0; i < effects[a].rows(); ++i)
          for (Eigen::Index j = 0; j < effects[a].cols(); ++j)
            e.block(i * sp.projectors[b].rows(), j * sp.projectors[b].cols(),
                    sp.projectors[b].rows(), sp.projectors[b].cols()) =
                effects[a](i, j) * sp.projectors[b];
        bool merged = false;
        for (std::size_t k = 0; k < nv.size(); ++k) {
          if (std::abs(nv[k] - v) <= 1e-12) {
            ne[k] += e;
            merged = true;
            break;
          }
        }
        if (!merged) {
          nv.push_back(v);
          ne.push_back(std::move(e));
        }
      }
    }
    values = std::move(nv);
    effects = std::move(ne);
  }
  std::vector<DenseOperator> effect_ops;
  effect_ops.reserve(effects.size());
  for (auto& e : effects) effect_ops.emplace_back(std::move(e));
  return std::make_shared<MeasurementOperator>(id, std::move(effect_ops),
                                               std::move(values),
                                               RealizationTag::product);
}

/// Family of all per-site combinations of the allowed locals.
/// `locals[s]` lists the observables selectable at site s; the family
/// enumerates the cartesian product in row-major order.
inline MeasurementFamily product_family(
    HilbertSpec spec, std::vector<std::vector<LocalObservable>> locals) {
  if (locals.empty()) throw validation_error("product_family: no sites");
  long long count = 1;
  long long dim_check = 1;
  for (std::size_t s = 0; s < locals.size(); ++s) {
    if (locals[s].empty())
      throw validation_error("product_family: empty local list at site " +
                             std::to_string(s));
    int d = locals[s][0].op.dim();
    for (const auto& l : locals[s]) {
      if (l.op.dim() != d)
        throw validation_error("product_family: mixed local dimensions");
      if (!l.op.is_hermitian())
        throw validation_error("product_family: non-Hermitian local " +
                               l.label);
    }
    count *= static_cast<long long>(locals[s].size());
    dim_check *= d;
  }
  if (dim_check != spec.dimension())
    throw validation_error("product_family: locals do not match space");
  auto shared = std::make_shared<std::vector<std::vector<LocalObservable>>>(
      std::move(locals));
  std::string name = "product:sites=" + std::to_string(shared->size()) +
                     ":choices=" + std::to_string(count);
  return MeasurementFamily::finite(
      std::move(name), spec, static_cast<std::size_t>(count),
      [shared](std::size_t index) {
        std::vector<LocalObservable> pick;
        std::size_t rest = index;
        for (std::size_t s = shared->size(); s-- > 0;) {
          const auto& options = (*shared)[s];
          pick.push_back(options[rest % options.size()]);
          rest /= options.size();
        }
        std::reverse(pick.begin(), pick.end());
        // Compute range without materializing: products of extreme
        // eigenvalues; cheapest correct route is materialization here,
        // and product measurements are small by construction.
        MeasurementPtr m = product_measurement(pick);
        return MeasurementRef(m);
      });
}

}  // namespace demesst
