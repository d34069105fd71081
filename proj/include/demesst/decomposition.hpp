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

/// \file decomposition.hpp
/// Writing a Hermitian target as C*I + sum_i f_i M_i over measurement
/// observables, the sampling cost Z = sum_i r_i |f_i|, and the
/// variance-optimal importance-sampling table p_i = r_i|f_i|/Z,
/// w_i = sgn(f_i) Z / r_i.

#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/measurement.hpp"

namespace demesst {

/// One retained term: a measurement handle and its real coefficient.
struct DecompTerm {
  MeasurementRef measurement;
  double f = 0.0;
};

/// One sampling-table row aligned with the term list.
struct SamplingEntry {
  double p = 0.0;
  double w = 0.0;
};

struct SamplingTable {
  double z = 0.0;
  std::vector<SamplingEntry> entries;
};

/// Builds the importance-sampling distribution from (f_i, r_i) pairs.
/// Each per-sample value w_i * lambda spans an interval of width
/// exactly Z, which is what bounds the per-shot variance by Z^2/4.
inline SamplingTable build_sampling(
    const std::vector<std::pair<double, double>>& f_and_r) {
  SamplingTable table;
  for (const auto& [f, r] : f_and_r) {
    if (!(r > 0.0))
      throw validation_error("sampling table requires positive ranges");
    table.z += r * std::abs(f);
  }
  if (table.z <= 0.0)
    throw validation_error(
        "all coefficients vanish; the target is a multiple of identity and "
        "needs no sampling");
  table.entries.reserve(f_and_r.size());
  for (const auto& [f, r] : f_and_r) {
    SamplingEntry e;
    e.p = r * std::abs(f) / table.z;
    e.w = (f >= 0.0 ? 1.0 : -1.0) * table.z / r;
    table.entries.push_back(e);
  }
  return table;
}

/// Immutable decomposition target = C*I + sum_i f_i M_i. Z and the
/// sampling table are computed eagerly; zero-coefficient terms are
/// dropped on construction so sgn(0) never reaches the table.
class Decomposition {
 public:
  Decomposition(std::string target_id, double constant,
                std::vector<DecompTerm> terms,
                double reconstruction_tol = 1e-10)
      : target_id_(std::move(target_id)),
        constant_(constant),
        reconstruction_tol_(reconstruction_tol) {
    terms_.reserve(terms.size());
    for (auto& t : terms) {
      if (t.f == 0.0) continue;
      if (!(t.measurement.range() > 0.0))
        throw validation_error("decomposition term has nonpositive range");
      terms_.push_back(std::move(t));
    }
    if (!terms_.empty()) {
      std::vector<std::pair<double, double>> fr;
      fr.reserve(terms_.size());
      for (const auto& t : terms_)
        fr.emplace_back(t.f, t.measurement.range());
      SamplingTable table = build_sampling(fr);
      z_ = table.z;
      sampling_ = std::move(table.entries);
    }
  }

  const std::string& target_id() const { return target_id_; }
  double constant() const { return constant_; }
  const std::vector<DecompTerm>& terms() const { return terms_; }
  double z() const { return z_; }
  const std::vector<SamplingEntry>& sampling() const { return sampling_; }
  double reconstruction_tolerance() const { return reconstruction_tol_; }

  /// Materializes C*I + sum f_i M_i. Intended for tests and small
  /// targets; touches every referenced measurement.
  DenseOperator reconstructed(int dim) const {
    Matrix acc = constant_ * Matrix::Identity(dim, dim);
    for (const auto& t : terms_) {
      MeasurementPtr m = t.measurement.get();
      if (m->dim() != dim)
        throw validation_error("reconstruction dimension mismatch");
      acc += t.f * m->observable().mat();
    }
    return DenseOperator(std::move(acc));
  }

  /// Text form: one header line, then one line per field. Terms are
  /// "term <f> <measurement id>"; floats use round-trip precision.
  std::string serialize() const {
    std::ostringstream out;
    char buf[64];
    out << "decomposition/v1\n";
    out << "target " << target_id_ << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", constant_);
    out << "constant " << buf << "\n";
    std::snprintf(buf, sizeof(buf), "%.17g", z_);
    out << "z " << buf << "\n";
    for (const auto& t : terms_) {
      std::snprintf(buf, sizeof(buf), "%.17g", t.f);
      out << "term " << buf << " " << t.measurement.id() << "\n";
    }
    return out.str();
  }

 private:
  std::string target_id_;
  double constant_ = 0.0;
  std::vector<DecompTerm> terms_;
  double z_ = 0.0;
  std::vector<SamplingEntry> sampling_;
  double reconstruction_tol_ = 1e-10;
};

inline double dfe_cost(const Decomposition& d) { return d.z(); }

/// Parsed form of the text serialization; measurement ids are not yet
/// resolved to handles.
struct ParsedDecomposition {
  std::string target_id;
  double constant = 0.0;
  double z = 0.0;
  std::vector<std::pair<std::string, double>> terms;  // (id, f)
};

inline ParsedDecomposition parse_decomposition(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "decomposition/v1")
    throw validation_error("decomposition text: bad header");
  ParsedDecomposition out;
  bool saw_target = false, saw_c = false, saw_z = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "target") {
      ls >> out.target_id;
      saw_target = true;
    } else if (key == "constant") {
      ls >> out.constant;
      saw_c = true;
    } else if (key == "z") {
      ls >> out.z;
      saw_z = true;
    } else if (key == "term") {
      double f = 0.0;
      std::string id;
      ls >> f >> id;
      if (ls.fail() || id.empty())
        throw validation_error("decomposition text: bad term line");
      out.terms.emplace_back(std::move(id), f);
    } else {
      throw validation_error("decomposition text: unknown key " + key);
    }
    if (ls.fail())
      throw validation_error("decomposition text: bad line: " + line);
  }
  if (!saw_target || !saw_c || !saw_z)
    throw validation_error("decomposition text: missing field");
  return out;
}

/// Rebuilds a Decomposition from parsed text using a measurement
/// lookup; the recorded Z must agree with the recomputed one.
template <typename Lookup>
inline Decomposition resolve_decomposition(const ParsedDecomposition& parsed,
                                           Lookup&& lookup,
                                           double z_tol = 1e-9) {
  std::vector<DecompTerm> terms;
  terms.reserve(parsed.terms.size());
  for (const auto& [id, f] : parsed.terms)
    terms.push_back(DecompTerm{lookup(id), f});
  Decomposition d(parsed.target_id, parsed.constant, std::move(terms));
  if (std::abs(d.z() - parsed.z) > z_tol * std::max(1.0, std::abs(parsed.z)))
    throw validation_error("decomposition text: recorded Z disagrees with "
                           "resolved terms");
  return d;
}

}  // namespace demesst
