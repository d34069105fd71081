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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "demesst/contrast.hpp"
#include "demesst/families.hpp"
#include "demesst/l1min.hpp"
#include "test_util.hpp"

using namespace demesst;

namespace {

MeasurementOperator aligned_average_povm(const DenseOperator& p) {
  Matrix e1 = (2.0 * p.mat() + Matrix::Identity(4, 4)) / 3.0;
  return MeasurementOperator(
      "avg", {DenseOperator(std::move(e1)),
              DenseOperator(Matrix(Matrix::Identity(4, 4) -
                                   (2.0 * p.mat() + Matrix::Identity(4, 4)) /
                                       3.0))},
      {1.0, 0.0}, RealizationTag::custom);
}

MeasurementOperator flipped(const MeasurementOperator& m) {
  std::vector<double> values = m.values();
  for (double& v : values) v = m.lambda_max() + m.lambda_min() - v;
  return MeasurementOperator(m.id() + ":flip", m.effects(),
                             std::move(values), m.tag());
}

/// tr(M~ O~) recomputed from scratch for checks.
double aligned_overlap_of(const MeasurementOperator& m,
                          const Matrix& otil) {
  Eigen::Index d = otil.rows();
  Matrix mtil = (m.observable().mat() -
                 (m.observable().mat().trace() / double(d)) *
                     Matrix::Identity(d, d)) /
                m.range();
  return mtil.conjugate().cwiseProduct(otil).sum().real();
}

Matrix traceless(const DenseOperator& o) {
  Eigen::Index d = o.dim();
  return o.mat() -
         (o.mat().trace() / double(d)) * Matrix::Identity(d, d);
}

}  // namespace

TEST_CASE("effective contrast scores one measurement against a target",
          "[contrast]") {
  MeasurementOperator mz =
      *pauli_measurement_ref(PauliString::from_string("Z")).get();
  DenseOperator zero2(Matrix(Matrix::Zero(2, 2)));
  REQUIRE(effective_contrast(test_pauli_z(), mz, zero2) ==
          Catch::Approx(1.0).margin(1e-12));

  // Any measurement leaning into the deviation scores zero.
  MeasurementOperator mx =
      *pauli_measurement_ref(PauliString::from_string("X")).get();
  REQUIRE(effective_contrast(test_pauli_z(), mx, test_pauli_x()) == 0.0);

  // The state-aligned average reads the Bell projector at one half.
  DenseOperator bell = two_qubit_schmidt_state(0.5).projector();
  DenseOperator zero4(Matrix(Matrix::Zero(4, 4)));
  REQUIRE(effective_contrast(bell, aligned_average_povm(bell), zero4) ==
          Catch::Approx(0.5).margin(1e-12));

  // Every member of the five-measurement family scores one half, for
  // any Schmidt weight.
  for (double lam : {0.5, 0.7, 1.0}) {
    DenseOperator p = two_qubit_schmidt_state(lam).projector();
    for (const MeasurementRef& ref :
         two_qubit_locc_family(lam).entries())
      REQUIRE(effective_contrast(p, *ref.get(), zero4) ==
              Catch::Approx(0.5).margin(1e-12));
  }

  DenseOperator eye(Matrix(Matrix::Identity(2, 2)));
  REQUIRE_THROWS_AS(effective_contrast(eye, mz, zero2),
                    validation_error);
  REQUIRE_THROWS_AS(effective_contrast(test_pauli_z(), mz, zero4),
                    validation_error);
  MeasurementOperator flat(
      "flat",
      {DenseOperator(Matrix(0.5 * Matrix::Identity(2, 2))),
       DenseOperator(Matrix(0.5 * Matrix::Identity(2, 2)))},
      {1.0, 1.0}, RealizationTag::custom);
  REQUIRE_THROWS_AS(effective_contrast(test_pauli_z(), flat, zero2),
                    validation_error);
}

TEST_CASE("two-qubit local family closes over the state projector",
          "[contrast]") {
  std::mt19937_64 rng(2233);
  std::uniform_real_distribution<double> unif(0.5, 1.0);
  std::vector<double> lams{0.5, 0.7, 1.0};
  for (int i = 0; i < 20; ++i) lams.push_back(unif(rng));

  for (double lam : lams) {
    MeasurementFamily fam = two_qubit_locc_family(lam);
    REQUIRE(fam.size() == 5);
    DenseOperator p = two_qubit_schmidt_state(lam).projector();

    Matrix closure = Matrix::Zero(4, 4);
    std::vector<double> weights{2.0, 1.0, 1.0, 1.0, 1.0};
    for (std::size_t i = 0; i < 5; ++i) {
      MeasurementPtr m = fam.at(i).get();
      REQUIRE(m->values() == std::vector<double>{1.0, 0.0});
      REQUIRE(m->range() == 1.0);
      REQUIRE(m->effects().size() == 2);
      const Matrix& e = m->effects()[0].mat();
      REQUIRE((e * e - e).cwiseAbs().maxCoeff() < 1e-12);
      closure += weights[i] * m->observable().mat();
    }
    Matrix expected = 2.0 * (2.0 * p.mat() + Matrix::Identity(4, 4));
    REQUIRE((closure - expected).cwiseAbs().maxCoeff() < 1e-11);

    // Solving for the projector gives the fixed-coefficient program
    // with one-norm 3/2, and the dictionary search agrees it is
    // optimal over this family.
    Matrix derived = closure / 4.0 - 0.5 * Matrix::Identity(4, 4);
    REQUIRE((derived - p.mat()).cwiseAbs().maxCoeff() < 1e-11);
    Decomposition d = l1_min_decompose(p, fam, 1e-8, "locc-test", 16);
    REQUIRE(d.z() == Catch::Approx(1.5).margin(1e-8));
    REQUIRE(d.constant() == Catch::Approx(-0.5).margin(1e-8));
  }

  REQUIRE_THROWS_AS(two_qubit_locc_family(0.49), validation_error);
  REQUIRE_THROWS_AS(two_qubit_locc_family(1.01), validation_error);
  REQUIRE_THROWS_AS(two_qubit_schmidt_state(0.3), validation_error);
}

TEST_CASE("iterative construction converges at the proven rate",
          "[contrast]") {
  for (double lam : {0.5, 0.8}) {
    DenseOperator p = two_qubit_schmidt_state(lam).projector();
    MeasurementFamily fam = two_qubit_locc_family(lam);
    MeasurementOracle oracle = make_locc_oracle(p, fam);
    const int n_max = 10000;
    ContrastState st = iterative_ensemble(p, oracle, n_max);

    REQUIRE(st.step == n_max);
    REQUIRE(st.ensemble.size() == static_cast<std::size_t>(n_max));
    REQUIRE(st.ensemble.front().meas.id().rfind("locc2:z:", 0) == 0);
    REQUIRE(st.target_norm2 == Catch::Approx(0.75).margin(1e-12));
    REQUIRE(st.implied_z() == Catch::Approx(1.5).margin(1e-9));
    REQUIRE(st.implied_z() <= 1.5 + 1e-6);

    double weight_sum = 0.0;
    for (const WeightedMeasurement& wm : st.ensemble) {
      weight_sum += wm.weight;
      REQUIRE(wm.aligned_overlap == Catch::Approx(0.5).margin(1e-12));
    }
    REQUIRE(weight_sum == Catch::Approx(1.0).margin(1e-12));

    const std::vector<double>& h = st.deviation_norm_history;
    const std::vector<double>& dn = st.delta_norm_history;
    REQUIRE(h.size() == static_cast<std::size_t>(n_max));
    for (std::size_t i = 0; i < h.size(); ++i) {
      REQUIRE(h[i] < std::sqrt(4.0 / double(i + 1)));
      REQUIRE(dn[i] < 2.0);  // deviation increments stay below sqrt(D)
      if (i > 0) {
        REQUIRE(h[i] < h[i - 1]);
        // Inverse squared norms accumulate step by step.
        double lhs = 1.0 / (h[i] * h[i]);
        double rhs = 1.0 / (dn[i] * dn[i]) + 1.0 / (h[i - 1] * h[i - 1]);
        REQUIRE(lhs >= rhs * (1.0 - 1e-9));
      }
    }

    // The stored deviation is exactly the gap between the weighted
    // normalized observable and its component along the target.
    Matrix otil = traceless(p);
    Matrix gap = Matrix::Zero(4, 4);
    double aligned = 0.0;
    for (const WeightedMeasurement& wm : st.ensemble) {
      Matrix mtil = (wm.meas.observable().mat() -
                     (wm.meas.observable().mat().trace() / 4.0) *
                         Matrix::Identity(4, 4)) /
                    wm.meas.range();
      gap += wm.weight * mtil;
      aligned += wm.weight * wm.aligned_overlap;
    }
    gap -= (aligned / st.target_norm2) * otil;
    REQUIRE((gap - st.deviation.mat()).cwiseAbs().maxCoeff() < 1e-10);
    REQUIRE(std::abs(st.deviation.mat().trace()) < 1e-10);
    REQUIRE(std::abs(gap.conjugate().cwiseProduct(otil).sum().real()) <
            1e-10);
    REQUIRE(st.deviation.mat().norm() ==
            Catch::Approx(h.back()).margin(1e-12));
  }
}

TEST_CASE("iterative construction rejects a broken oracle",
          "[contrast]") {
  DenseOperator bell = two_qubit_schmidt_state(0.5).projector();

  // Orthogonal to the target: violates the alignment inequality at
  // step one.
  MeasurementOperator xi =
      *pauli_measurement_ref(PauliString::from_string("XI")).get();
  try {
    iterative_ensemble(
        bell, [&](const DenseOperator&) { return xi; }, 10);
    FAIL("expected a contract diagnostic");
  } catch (const infeasible_error& e) {
    REQUIRE(std::string(e.what()).find("step 1") != std::string::npos);
  }

  // A fixed aligned measurement passes step one but leans into its own
  // deviation at step two.
  MeasurementFamily fam = two_qubit_locc_family(0.5);
  MeasurementOperator mz = *fam.at(0).get();
  try {
    iterative_ensemble(
        bell, [&](const DenseOperator&) { return mz; }, 10);
    FAIL("expected a contract diagnostic");
  } catch (const infeasible_error& e) {
    REQUIRE(std::string(e.what()).find("step 2") != std::string::npos);
    REQUIRE(std::string(e.what()).find("deviation") != std::string::npos);
  }

  REQUIRE_THROWS_AS(iterative_ensemble(bell, MeasurementOracle{}, 10),
                    validation_error);
  REQUIRE_THROWS_AS(
      iterative_ensemble(
          bell, [&](const DenseOperator&) { return mz; }, 0),
      validation_error);
  DenseOperator eye(Matrix(Matrix::Identity(4, 4)));
  REQUIRE_THROWS_AS(
      iterative_ensemble(
          eye, [&](const DenseOperator&) { return mz; }, 10),
      validation_error);
}

TEST_CASE("a measurement proportional to the target ends the iteration",
          "[contrast]") {
  DenseOperator bell = two_qubit_schmidt_state(0.5).projector();
  MeasurementOperator avg = aligned_average_povm(bell);
  ContrastState st = iterative_ensemble(
      bell, [&](const DenseOperator&) { return avg; }, 50);
  REQUIRE(st.step == 1);
  REQUIRE(st.ensemble.size() == 1);
  REQUIRE(st.ensemble[0].weight == 1.0);
  REQUIRE(st.deviation_norm_history.back() < 1e-12);
  REQUIRE(st.deviation.mat().norm() < 1e-12);
  REQUIRE(st.implied_z() == Catch::Approx(1.5).margin(1e-12));
}

TEST_CASE("search oracle picks the highest eligible contrast",
          "[contrast]") {
  DenseOperator p = two_qubit_schmidt_state(0.7).projector();
  MeasurementFamily fam = two_qubit_locc_family(0.7);
  MeasurementOracle oracle = make_locc_oracle(p, fam);
  Matrix otil = traceless(p);

  std::vector<MeasurementOperator> pool;
  for (const MeasurementRef& ref : fam.entries()) {
    pool.push_back(*ref.get());
    pool.push_back(flipped(*ref.get()));
  }

  // Replicate three steps by hand, checking the oracle choice attains
  // the maximal effective contrast over the pool each time.
  Matrix sig = Matrix::Zero(4, 4);
  double signorm2 = 0.0;
  for (int step = 1; step <= 3; ++step) {
    DenseOperator sig_op((Matrix(sig)));
    MeasurementOperator chosen = oracle(sig_op);
    double chosen_y = effective_contrast(p, chosen, sig_op);
    double best_y = 0.0;
    for (const MeasurementOperator& cand : pool)
      best_y = std::max(best_y, effective_contrast(p, cand, sig_op));
    REQUIRE(chosen_y == Catch::Approx(best_y).margin(1e-9));
    REQUIRE(chosen_y > 0.0);

    double y = aligned_overlap_of(chosen, otil);
    Matrix mtil = (chosen.observable().mat() -
                   (chosen.observable().mat().trace() / 4.0) *
                       Matrix::Identity(4, 4)) /
                  chosen.range();
    Matrix delta = mtil - (y / otil.squaredNorm()) * otil;
    double pweight = step == 1 ? 1.0
                               : signorm2 / (delta.squaredNorm() +
                                             signorm2);
    sig = (pweight * delta + (1.0 - pweight) * sig).eval();
    signorm2 = sig.squaredNorm();
  }
  ContrastState st = iterative_ensemble(p, oracle, 3);
  REQUIRE((st.deviation.mat() - sig).cwiseAbs().maxCoeff() < 1e-12);

  REQUIRE_THROWS_AS(oracle(DenseOperator(Matrix(Matrix::Zero(2, 2)))),
                    validation_error);
}

TEST_CASE("convergence trace serializes step, norm, and implied cost",
          "[contrast]") {
  DenseOperator bell = two_qubit_schmidt_state(0.5).projector();
  MeasurementOracle oracle =
      make_locc_oracle(bell, two_qubit_locc_family(0.5));
  ContrastState st = iterative_ensemble(bell, oracle, 12);
  std::string tsv = convergence_trace_tsv(st);
  REQUIRE(tsv.rfind("step\tdeviation_norm\timplied_z\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : tsv)
    if (c == '\n') ++lines;
  REQUIRE(lines == 13);
  REQUIRE(tsv.find("\t1.5\n") != std::string::npos);
}
