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

/// \file measurement.hpp
/// POVM measurements with real outcome values, lazy measurement
/// references (so grid-sized dictionaries never hold dense effects),
/// and finite/parameterized measurement families.

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"

namespace demesst {

/// Effects must sum to the identity within this entrywise tolerance.
inline constexpr double kEffectSumTol = 1e-10;
/// Effects must be PSD down to this eigenvalue tolerance.
inline constexpr double kEffectPsdTol = 1e-10;

enum class RealizationTag {
  pauli,
  product,
  displaced_parity,
  vacuum_projection,
  hadamard_expanded,
  custom,
};

inline const char* to_string(RealizationTag t) {
  switch (t) {
    case RealizationTag::pauli: return "pauli";
    case RealizationTag::product: return "product";
    case RealizationTag::displaced_parity: return "displaced_parity";
    case RealizationTag::vacuum_projection: return "vacuum_projection";
    case RealizationTag::hadamard_expanded: return "hadamard_expanded";
    case RealizationTag::custom: return "custom";
  }
  return "custom";
}

/// A measurement: PSD effects summing to I, one real value per
/// outcome, and the induced observable sum_j lambda_j Lambda_j.
/// Completeness and positivity are checked at construction.
class MeasurementOperator {
 public:
  MeasurementOperator(std::string id, std::vector<DenseOperator> effects,
                      std::vector<double> values, RealizationTag tag)
      : id_(std::move(id)),
        effects_(std::move(effects)),
        values_(std::move(values)),
        tag_(tag) {
    if (effects_.empty() || effects_.size() != values_.size())
      throw validation_error("measurement needs matching effects/values");
    int d = effects_[0].dim();
    Matrix sum = Matrix::Zero(d, d);
    Matrix obs = Matrix::Zero(d, d);
    lambda_min_ = values_[0];
    lambda_max_ = values_[0];
    for (std::size_t j = 0; j < effects_.size(); ++j) {
      const DenseOperator& e = effects_[j];
      if (e.dim() != d)
        throw validation_error("measurement effects differ in dimension");
      if (!e.is_hermitian())
        throw validation_error("measurement effect not Hermitian");
      Eigen::SelfAdjointEigenSolver<Matrix> es(e.mat(),
                                               Eigen::EigenvaluesOnly);
      if (es.eigenvalues()(0) < -kEffectPsdTol)
        throw validation_error("measurement effect not PSD (min eig " +
                               std::to_string(es.eigenvalues()(0)) + ")");
      sum += e.mat();
      obs += values_[j] * e.mat();
      lambda_min_ = std::min(lambda_min_, values_[j]);
      lambda_max_ = std::max(lambda_max_, values_[j]);
    }
    if ((sum - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() > kEffectSumTol)
      throw validation_error("measurement effects do not sum to identity");
    observable_ = DenseOperator(std::move(obs));
  }

  const std::string& id() const { return id_; }
  int dim() const { return effects_[0].dim(); }
  const std::vector<DenseOperator>& effects() const { return effects_; }
  const std::vector<double>& values() const { return values_; }
  const DenseOperator& observable() const { return observable_; }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  double range() const { return lambda_max_ - lambda_min_; }
  RealizationTag tag() const { return tag_; }

 private:
  std::string id_;
  std::vector<DenseOperator> effects_;
  std::vector<double> values_;
  RealizationTag tag_;
  DenseOperator observable_;
  double lambda_min_ = 0.0, lambda_max_ = 0.0;
};

using MeasurementPtr = std::shared_ptr<const MeasurementOperator>;

/// Handle to a measurement that defers dense construction. Eager refs
/// share one materialized measurement; lazy refs rebuild on demand (a
/// pure function of captured parameters, so concurrent `get` is safe).
/// The outcome range is stored so costs and sampling tables never force
/// materialization.
class MeasurementRef {
 public:
  MeasurementRef() = default;

  explicit MeasurementRef(MeasurementPtr m)
      : id_(m->id()), range_(m->range()), eager_(std::move(m)) {}

  MeasurementRef(std::string id, double range,
                 std::function<MeasurementPtr()> factory)
      : id_(std::move(id)), range_(range), factory_(std::move(factory)) {}

  const std::string& id() const { return id_; }
  double range() const { return range_; }

  MeasurementPtr get() const {
    if (eager_) return eager_;
    MeasurementPtr m = factory_();
    if (m->id() != id_)
      throw validation_error("measurement factory id mismatch: " + id_ +
                             " vs " + m->id());
    return m;
  }

 private:
  std::string id_;
  double range_ = 0.0;
  MeasurementPtr eager_;
  std::function<MeasurementPtr()> factory_;
};

/// A finite (possibly lazily enumerated) or parameterized family of
/// measurements. Finite families expose size/at; parameterized ones map
/// a phase-space point to a measurement.
class MeasurementFamily {
 public:
  enum class Kind { finite, parameterized };

  static MeasurementFamily finite(std::string name, HilbertSpec spec,
                                  std::size_t count,
                                  std::function<MeasurementRef(std::size_t)>
                                      entry) {
    MeasurementFamily f(Kind::finite, std::move(name), spec);
    f.count_ = count;
    f.entry_ = std::move(entry);
    return f;
  }

  static MeasurementFamily finite_list(std::string name, HilbertSpec spec,
                                       std::vector<MeasurementRef> entries) {
    auto shared =
        std::make_shared<std::vector<MeasurementRef>>(std::move(entries));
    return finite(std::move(name), spec, shared->size(),
                  [shared](std::size_t i) { return (*shared)[i]; });
  }

  static MeasurementFamily parameterized(
      std::string name, HilbertSpec spec,
      std::function<MeasurementPtr(const std::vector<Complex>&)> at_param) {
    MeasurementFamily f(Kind::parameterized, std::move(name), spec);
    f.at_param_ = std::move(at_param);
    return f;
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  const HilbertSpec& hilbert() const { return spec_; }
  /// Content-hash identifier, stable across runs.
  std::string id() const { return hex16(fnv1a64(name_)); }

  std::size_t size() const {
    require(Kind::finite);
    return count_;
  }
  MeasurementRef at(std::size_t i) const {
    require(Kind::finite);
    if (i >= count_) throw validation_error("family index out of range");
    return entry_(i);
  }
  MeasurementPtr at_parameter(const std::vector<Complex>& alpha) const {
    require(Kind::parameterized);
    return at_param_(alpha);
  }

  /// Materializes every ref of a finite family (dictionary use).
  std::vector<MeasurementRef> entries() const {
    require(Kind::finite);
    std::vector<MeasurementRef> out;
    out.reserve(count_);
    for (std::size_t i = 0; i < count_; ++i) out.push_back(entry_(i));
    return out;
  }

 private:
  MeasurementFamily(Kind k, std::string name, HilbertSpec spec)
      : kind_(k), name_(std::move(name)), spec_(spec) {}

  void require(Kind k) const {
    if (kind_ != k)
      throw validation_error("family kind mismatch for operation");
  }

  Kind kind_;
  std::string name_;
  HilbertSpec spec_;
  std::size_t count_ = 0;
  std::function<MeasurementRef(std::size_t)> entry_;
  std::function<MeasurementPtr(const std::vector<Complex>&)> at_param_;
};

}  // namespace demesst
