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

#include <algorithm>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <map>
#include <vector>

#include "demesst/families.hpp"
#include "demesst/measurement.hpp"
#include "demesst/pauli.hpp"
#include "test_util.hpp"

using namespace demesst;

TEST_CASE("measurement construction validates a POVM") {
  Matrix half = 0.5 * Matrix::Identity(2, 2);

  SECTION("accepts a valid two-outcome measurement") {
    std::vector<DenseOperator> effs{DenseOperator(half),
                                    DenseOperator(half)};
    MeasurementOperator m("demo", std::move(effs), {1.0, -1.0},
                          RealizationTag::custom);
    CHECK(m.dim() == 2);
    CHECK(m.lambda_min() == -1.0);
    CHECK(m.lambda_max() == 1.0);
    CHECK(m.range() == 2.0);
    CHECK(approx_equal(m.observable(), DenseOperator::zero(2), 1e-12));
  }

  SECTION("rejects effects that do not sum to identity") {
    std::vector<DenseOperator> effs{DenseOperator(half)};
    CHECK_THROWS_AS(MeasurementOperator("bad", std::move(effs), {1.0},
                                        RealizationTag::custom),
                    validation_error);
  }

  SECTION("rejects a non-PSD effect") {
    Matrix over = 1.25 * Matrix::Identity(2, 2);
    Matrix under = -0.25 * Matrix::Identity(2, 2);
    std::vector<DenseOperator> effs{DenseOperator(over),
                                    DenseOperator(under)};
    CHECK_THROWS_AS(MeasurementOperator("bad", std::move(effs), {1.0, 0.0},
                                        RealizationTag::custom),
                    validation_error);
  }

  SECTION("rejects mismatched values") {
    std::vector<DenseOperator> effs{DenseOperator(half),
                                    DenseOperator(half)};
    CHECK_THROWS_AS(MeasurementOperator("bad", std::move(effs), {1.0},
                                        RealizationTag::custom),
                    validation_error);
  }
}

TEST_CASE("single-qubit pauli family is {X, Y, Z}") {
  MeasurementFamily fam = pauli_family(1);
  REQUIRE(fam.size() == 3);
  std::map<std::string, DenseOperator> expect{
      {"X", test_pauli_x()}, {"Y", test_pauli_y()}, {"Z", test_pauli_z()}};
  for (std::size_t i = 0; i < fam.size(); ++i) {
    MeasurementRef ref = fam.at(i);
    REQUIRE(expect.count(ref.id()) == 1);
    CHECK(ref.range() == 2.0);
    MeasurementPtr m = ref.get();
    CHECK(m->tag() == RealizationTag::pauli);
    CHECK(approx_equal(m->observable(), expect.at(ref.id()), 1e-12));
    REQUIRE(m->values().size() == 2);
    CHECK(m->values()[0] == 1.0);
    CHECK(m->values()[1] == -1.0);
    // Effects are the +-1 eigenprojectors (I +- P)/2.
    Matrix plus = 0.5 * (Matrix::Identity(2, 2) + expect.at(ref.id()).mat());
    CHECK(approx_equal(m->effects()[0], DenseOperator(plus), 1e-12));
  }
}

TEST_CASE("two-qubit pauli family has 15 entries, ZZ is diagonal") {
  MeasurementFamily fam = pauli_family(2);
  REQUIRE(fam.size() == 15);
  bool found = false;
  for (std::size_t i = 0; i < fam.size(); ++i) {
    MeasurementRef ref = fam.at(i);
    if (ref.id() != "ZZ") continue;
    found = true;
    Matrix d = Matrix::Zero(4, 4);
    d(0, 0) = 1;
    d(1, 1) = -1;
    d(2, 2) = -1;
    d(3, 3) = 1;
    CHECK(approx_equal(ref.get()->observable(), DenseOperator(d), 1e-12));
  }
  CHECK(found);
}

TEST_CASE("pauli family observables are pairwise HS-orthogonal") {
  for (int m : {1, 2}) {
    MeasurementFamily fam = pauli_family(m);
    std::vector<DenseOperator> obs;
    for (std::size_t i = 0; i < fam.size(); ++i)
      obs.push_back(fam.at(i).get()->observable());
    for (std::size_t i = 0; i < obs.size(); ++i)
      for (std::size_t j = i + 1; j < obs.size(); ++j)
        CHECK(std::abs(hs_inner(obs[i], obs[j])) < 1e-12);
  }
}

TEST_CASE("large pauli family enumerates lazily") {
  MeasurementFamily fam = pauli_family(12);
  CHECK(fam.size() == (1ull << 24) - 1);
  // Refs carry id and range without touching dense matrices.
  CHECK(fam.at(0).id() == "IIIIIIIIIIIX");
  CHECK(fam.at(fam.size() - 1).id() == "ZZZZZZZZZZZZ");
  CHECK(fam.at(7).range() == 2.0);
  CHECK_THROWS_AS(fam.at(fam.size()), validation_error);
  CHECK_THROWS_AS(pauli_family(0), validation_error);
  CHECK_THROWS_AS(pauli_family(13), validation_error);
}

TEST_CASE("product family over {X,Y,Z} reproduces the pauli family") {
  std::vector<LocalObservable> locals{{"X", test_pauli_x()},
                                      {"Y", test_pauli_y()},
                                      {"Z", test_pauli_z()}};
  MeasurementFamily fam =
      product_family(HilbertSpec::qubits(1), {locals});
  REQUIRE(fam.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    MeasurementPtr m = fam.at(i).get();
    CHECK(m->tag() == RealizationTag::product);
    CHECK(approx_equal(m->observable(), locals[i].op, 1e-12));
    CHECK(m->range() == 2.0);
  }
}

TEST_CASE("projector-valued product locals give {0,1} outcomes") {
  std::vector<LocalObservable> locals{{"m+", test_magic_projector()}};
  MeasurementFamily fam = product_family(
      HilbertSpec::qubits(2), {locals, locals});
  REQUIRE(fam.size() == 1);
  MeasurementPtr m = fam.at(0).get();
  for (double v : m->values()) CHECK((v == 0.0 || v == 1.0));
  CHECK(m->lambda_min() == 0.0);
  CHECK(m->lambda_max() == 1.0);
  CHECK(m->range() == 1.0);
  // Observable is the product projector itself.
  CHECK(approx_equal(
      m->observable(),
      tensor_product(test_magic_projector(), test_magic_projector()),
      1e-12));
}

TEST_CASE("mixed product locals multiply eigenvalues and merge outcomes") {
  Matrix p0 = Matrix::Zero(2, 2);
  p0(0, 0) = 1.0;
  std::vector<std::vector<LocalObservable>> locals{
      {{"Z", test_pauli_z()}}, {{"p0", DenseOperator(p0)}}};
  MeasurementFamily fam = product_family(HilbertSpec::qubits(2), locals);
  MeasurementPtr m = fam.at(0).get();
  CHECK(approx_equal(m->observable(),
                     tensor_product(test_pauli_z(), DenseOperator(p0)),
                     1e-12));
  std::vector<double> vals = m->values();
  std::sort(vals.begin(), vals.end());
  REQUIRE(vals.size() == 3);
  CHECK(vals[0] == -1.0);
  CHECK(vals[1] == 0.0);
  CHECK(vals[2] == 1.0);
}

TEST_CASE("equal product values merge into one outcome") {
  std::vector<LocalObservable> locals{{"Z", test_pauli_z()}};
  MeasurementFamily fam = product_family(
      HilbertSpec::qubits(2), {locals, locals});
  MeasurementPtr m = fam.at(0).get();
  // ZZ products collapse to two outcomes, +1 (even parity) and -1.
  REQUIRE(m->values().size() == 2);
  std::vector<double> vals = m->values();
  std::sort(vals.begin(), vals.end());
  CHECK(vals[0] == -1.0);
  CHECK(vals[1] == 1.0);
  for (const DenseOperator& e : m->effects())
    CHECK(std::abs(e.trace().real() - 2.0) < 1e-12);
}

TEST_CASE("product family validates its locals") {
  Matrix skew(2, 2);
  skew << 0, 1, 0, 0;
  CHECK_THROWS_AS(
      product_family(HilbertSpec::qubits(1),
                     {{{"bad", DenseOperator(skew)}}}),
      validation_error);
  CHECK_THROWS_AS(
      product_family(HilbertSpec::qubits(2),
                     {{{"Z", test_pauli_z()}}}),
      validation_error);
  CHECK_THROWS_AS(product_family(HilbertSpec::qubits(1), {}),
                  validation_error);
}

TEST_CASE("spectral measurement reconstructs its observable") {
  Matrix d = Matrix::Zero(3, 3);
  d(0, 0) = 2.0;
  d(1, 1) = 2.0;
  d(2, 2) = -1.0;
  MeasurementPtr m = spectral_measurement("diag", DenseOperator(d));
  REQUIRE(m->values().size() == 2);  // degenerate pair merged
  CHECK(approx_equal(m->observable(), DenseOperator(d), 1e-12));
  CHECK(m->range() == 3.0);
}

TEST_CASE("identity measurement accepts every shot") {
  MeasurementPtr m = identity_measurement(HilbertSpec::qubits(2));
  REQUIRE(m->effects().size() == 1);
  CHECK(approx_equal(m->effects()[0], DenseOperator::identity(4), 1e-15));
  CHECK(m->values()[0] == 1.0);
  CHECK(m->range() == 0.0);
}

TEST_CASE("family ids are stable content hashes") {
  MeasurementFamily a = pauli_family(2);
  MeasurementFamily b = pauli_family(2);
  CHECK(a.id() == b.id());
  CHECK(a.id().size() == 16);
  CHECK(a.id() != pauli_family(3).id());
}

TEST_CASE("family kind is enforced") {
  MeasurementFamily fam = pauli_family(1);
  CHECK_THROWS_AS(fam.at_parameter({Complex(0, 0)}), validation_error);
  MeasurementFamily par = MeasurementFamily::parameterized(
      "demo", HilbertSpec::qubits(1),
      [](const std::vector<Complex>&) {
        return spectral_measurement("Z", test_pauli_z());
      });
  CHECK_THROWS_AS(par.size(), validation_error);
  CHECK_THROWS_AS(par.at(0), validation_error);
  CHECK(par.at_parameter({Complex(1, 0)})->range() == 2.0);
}

TEST_CASE("lazy ref factories must match their declared id") {
  MeasurementRef bad("not-Z", 2.0,
                     [] { return spectral_measurement("Z", test_pauli_z()); });
  CHECK_THROWS_AS(bad.get(), validation_error);
}
