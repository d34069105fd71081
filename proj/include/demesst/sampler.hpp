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

/// Born-rule simulation of measurements on a known state, Monte Carlo
/// estimation of decomposed observables, and Hoeffding sample
/// planning. Estimation is organized in fixed-size sample chunks so
/// the merged result is bit-for-bit identical for every worker count,
/// and sample logs replay the exact draw sequence.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "demesst/core.hpp"
#include "demesst/decomposition.hpp"
#include "demesst/measurement.hpp"
#include "demesst/rng.hpp"
#include "demesst/source.hpp"

namespace demesst {

/// Slack allowed when outcome probabilities are renormalized, and the
/// magnitude beyond which a negative probability is an error.
inline constexpr double kProbabilityTol = 1e-8;

/// Samples per work unit. Chunk boundaries, not worker boundaries,
/// define the accumulation order, which is what makes the merged
/// estimate independent of the worker count.
inline constexpr std::int64_t kSampleChunk = 4096;

/// Column header of the sample log format.
inline constexpr const char* kSampleLogHeader =
    "target_id\tsample_index\tmeasurement_id\toutcome\tweight\n";

/// Execution knobs for dfe_estimate.
struct SamplerOptions {
  std::uint64_t seed = 0;
  int workers = 1;                // 0 selects hardware concurrency
  double delta = 0.05;            // confidence for the reported epsilon
  std::string sample_log_path{};  // empty disables the sample log
};

/// One Monte Carlo estimate with its precision metadata.
struct EstimatorResult {
  double mean = 0.0;
  double stderr_of_mean = 0.0;
  std::int64_t n = 0;
  double z = 0.0;
  double delta = 0.0;
  double hoeffding_epsilon_at_delta = 0.0;
  std::optional<std::string> sample_log_ref;
};

/// Samples needed so that |estimate - truth| <= epsilon except with
/// probability delta, for per-sample values spanning a width-Z range:
/// ceil(Z^2 / (2 epsilon^2) * ln(2/delta)).
inline std::int64_t hoeffding_samples(double z, double epsilon,
                                      double delta) {
  if (!(z > 0.0))
    throw validation_error("hoeffding_samples requires Z > 0");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw validation_error("hoeffding_samples requires epsilon in (0,1)");
  if (!(delta > 0.0 && delta < 1.0))
    throw validation_error("hoeffding_samples requires delta in (0,1)");
  double raw = z * z / (2.0 * epsilon * epsilon) * std::log(2.0 / delta);
  return static_cast<std::int64_t>(std::ceil(raw));
}

/// Born-rule outcome distribution tr(rho Lambda_j), clipped of
/// sub-tolerance negatives and renormalized. Deviations beyond
/// kProbabilityTol in either direction are errors.
inline std::vector<double> outcome_distribution(
    const DenseOperator& rho, const MeasurementOperator& meas) {
  if (rho.dim() != meas.dim())
    throw validation_error("state and measurement dimensions differ");
  const std::size_t k = meas.effects().size();
  std::vector<double> probs(k);
  double sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    Complex v =
        rho.mat().transpose().cwiseProduct(meas.effects()[j].mat()).sum();
    double pj = v.real();
    if (pj < -kProbabilityTol)
      throw validation_error("outcome probability " + std::to_string(pj) +
                             " is negative beyond tolerance");
    probs[j] = std::max(pj, 0.0);
    sum += probs[j];
  }
  if (std::abs(sum - 1.0) > kProbabilityTol)
    throw validation_error("outcome probabilities sum to " +
                           std::to_string(sum) + ", not 1");
  for (double& p : probs) p /= sum;
  return probs;
}

namespace detail {

/// First index whose cumulative weight exceeds u; the final entry
/// absorbs any rounding shortfall at the top of the range.
inline std::size_t pick_index(const std::vector<double>& cum, double u) {
  auto it = std::upper_bound(cum.begin(), cum.end(), u);
  if (it == cum.end()) return cum.size() - 1;
  return static_cast<std::size_t>(it - cum.begin());
}

inline std::vector<double> cumulative(const std::vector<double>& p) {
  std::vector<double> cum(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cum[i] = acc;
  }
  return cum;
}

/// A decomposition term materialized against a fixed state: the
/// measurement, its outcome distribution, and its sampling row.
struct MaterializedTerm {
  MeasurementPtr meas;
  std::vector<double> probs;
  double p = 0.0;
  double w = 0.0;
};

inline std::vector<MaterializedTerm> materialize_terms(
    const PhysicalStateSource& source, const Decomposition& decomp) {
  const auto& terms = decomp.terms();
  const auto& sampling = decomp.sampling();
  std::vector<MaterializedTerm> out;
  out.reserve(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    MeasurementPtr m = terms[i].measurement.get();
    if (m->dim() != source.dim())
      throw validation_error("decomposition term dimension mismatch");
    out.push_back({m, outcome_distribution(source.density(), *m),
                   sampling[i].p, sampling[i].w});
  }
  return out;
}

/// Exact first and second moments of the per-sample value w_i * lambda_j
/// under the joint term / outcome distribution (no sampling).
inline std::pair<double, double> exact_moments(
    const PhysicalStateSource& source, const Decomposition& decomp) {
  double m1 = 0.0, m2 = 0.0;
  for (const auto& t : materialize_terms(source, decomp)) {
    const auto& values = t.meas->values();
    for (std::size_t j = 0; j < values.size(); ++j) {
      double x = t.w * values[j];
      m1 += t.p * t.probs[j] * x;
      m2 += t.p * t.probs[j] * x * x;
    }
  }
  return {m1, m2};
}

inline void append_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

}  // namespace detail

/// Draws one outcome of a measurement on the source state and returns
/// its value. Consumes one draw of the stream.
inline double simulate_measure(const PhysicalStateSource& source,
                               const MeasurementOperator& meas,
                               rng::Stream& stream) {
  std::vector<double> cum =
      detail::cumulative(outcome_distribution(source.density(), meas));
  std::size_t j = detail::pick_index(cum, stream.uniform());
  return meas.values()[j];
}

/// Branch-summed expectation of the estimator: C plus the mean of the
/// per-sample value. Equals tr(rho O) - C tr(rho) + C with no
/// sampling error.
inline double exact_estimator_mean(const PhysicalStateSource& source,
                                   const Decomposition& decomp) {
  if (decomp.terms().empty()) return decomp.constant();
  return decomp.constant() + detail::exact_moments(source, decomp).first;
}

/// Exact variance of the per-sample value w_i * lambda_j (the constant
/// offset does not contribute).
inline double exact_estimator_variance(const PhysicalStateSource& source,
                                       const Decomposition& decomp) {
  if (decomp.terms().empty()) return 0.0;
  auto [m1, m2] = detail::exact_moments(source, decomp);
  return std::max(m2 - m1 * m1, 0.0);
}

/// Monte Carlo estimate of the decomposed observable on the source
/// state: draws term i with probability p_i, measures it, and averages
/// w_i * lambda + C over t samples. Sample s is driven entirely by
/// (seed, target id, s), so any partition of the range across workers
/// reproduces the same estimate and, when enabled, the same sample log.
inline EstimatorResult dfe_estimate(const PhysicalStateSource& source,
                                    const Decomposition& decomp,
                                    std::int64_t t,
                                    const SamplerOptions& opts = {}) {
  if (t < 1) throw validation_error("sample count must be at least 1");
  if (!(opts.delta > 0.0 && opts.delta < 1.0))
    throw validation_error("delta must lie in (0,1)");
  const bool logging = !opts.sample_log_path.empty();

  EstimatorResult res;
  res.n = t;
  res.z = decomp.z();
  res.delta = opts.delta;

  struct Chunk {
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;
    std::string log;
  };

  auto write_log = [&](const std::vector<Chunk>& done) {
    std::ofstream f(opts.sample_log_path, std::ios::binary);
    if (!f)
      throw validation_error("cannot open sample log path " +
                             opts.sample_log_path);
    f << kSampleLogHeader;
    for (const Chunk& ch : done) f << ch.log;
    f.flush();
    if (!f)
      throw validation_error("failed writing sample log " +
                             opts.sample_log_path);
    res.sample_log_ref = opts.sample_log_path;
  };

  if (decomp.terms().empty()) {
    res.mean = decomp.constant();
    if (logging) write_log({});
    return res;
  }

  const auto terms = detail::materialize_terms(source, decomp);
  std::vector<double> term_probs(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) term_probs[i] = terms[i].p;
  const std::vector<double> term_cum = detail::cumulative(term_probs);
  std::vector<std::vector<double>> outcome_cum(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    outcome_cum[i] = detail::cumulative(terms[i].probs);

  const std::uint64_t key = rng::stream_key(opts.seed, decomp.target_id());
  const std::int64_t n_chunks = (t + kSampleChunk - 1) / kSampleChunk;
  std::vector<Chunk> chunks(static_cast<std::size_t>(n_chunks));

  auto run_chunk = [&](std::int64_t ci) {
    Chunk& ch = chunks[static_cast<std::size_t>(ci)];
    const std::int64_t lo = ci * kSampleChunk;
    const std::int64_t hi = std::min(t, lo + kSampleChunk);
    if (logging)
      ch.log.reserve(static_cast<std::size_t>(hi - lo) * 48);
    for (std::int64_t s = lo; s < hi; ++s) {
      rng::Stream stream =
          rng::sample_stream(key, static_cast<std::uint64_t>(s));
      std::size_t i = detail::pick_index(term_cum, stream.uniform());
      std::size_t j = detail::pick_index(outcome_cum[i], stream.uniform());
      double lambda = terms[i].meas->values()[j];
      double x = terms[i].w * lambda;
      ch.n += 1;
      double d1 = x - ch.mean;
      ch.mean += d1 / static_cast<double>(ch.n);
      ch.m2 += d1 * (x - ch.mean);
      if (logging) {
        ch.log += decomp.target_id();
        ch.log += '\t';
        ch.log += std::to_string(s);
        ch.log += '\t';
        ch.log += terms[i].meas->id();
        ch.log += '\t';
        detail::append_double(ch.log, lambda);
        ch.log += '\t';
        detail::append_double(ch.log, terms[i].w);
        ch.log += '\n';
      }
    }
  };

  int workers = opts.workers;
  if (workers == 0) {
    unsigned hw = std::thread::hardware_concurrency();
    workers = hw > 0 ? static_cast<int>(hw) : 1;
  }
  if (workers < 1)
    throw validation_error("worker count must be nonnegative");
  workers = static_cast<int>(
      std::min<std::int64_t>(workers, n_chunks));

  if (workers <= 1) {
    for (std::int64_t ci = 0; ci < n_chunks; ++ci) run_chunk(ci);
  } else {
    std::atomic<std::int64_t> next{0};
    std::vector<std::exception_ptr> errors(
        static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::int64_t ci; (ci = next.fetch_add(1)) < n_chunks;)
            run_chunk(ci);
        } catch (...) {
          errors[static_cast<std::size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Chunk merge in fixed chunk order (pairwise mean/variance
  // combination), independent of which worker ran which chunk.
  std::int64_t n = 0;
  double mean = 0.0, m2 = 0.0;
  for (const Chunk& ch : chunks) {
    if (ch.n == 0) continue;
    const std::int64_t nn = n + ch.n;
    const double d = ch.mean - mean;
    m2 += ch.m2 + d * d * static_cast<double>(n) *
                      static_cast<double>(ch.n) / static_cast<double>(nn);
    mean += d * static_cast<double>(ch.n) / static_cast<double>(nn);
    n = nn;
  }

  res.mean = decomp.constant() + mean;
  double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  res.stderr_of_mean = std::sqrt(std::max(var, 0.0) /
                                 static_cast<double>(n));
  res.hoeffding_epsilon_at_delta =
      res.z * std::sqrt(std::log(2.0 / opts.delta) /
                        (2.0 * static_cast<double>(n)));

  if (logging) write_log(chunks);
  return res;
}

}  // namespace demesst
