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
#include <vector>

#include "demesst/families.hpp"
#include "demesst/hadamard.hpp"
#include "test_util.hpp"

using namespace demesst;

TEST_CASE("empty control list leaves the base measurement untouched") {
  MeasurementPtr base = spectral_measurement("Z", test_pauli_z());
  MeasurementPtr out = hadamard_expand(base, {}, {});
  CHECK(out.get() == base.get());
}

TEST_CASE("conjugation moves the measurement frame") {
  std::mt19937_64 rng(11);
  Matrix v = test_random_unitary(4, rng);
  DenseOperator o = test_random_hermitian(4, rng);
  MeasurementPtr base = spectral_measurement("obs", o);
  MeasurementPtr moved = conjugate_measurement(base, v);
  CHECK(moved->values() == base->values());
  CHECK(approx_equal(moved->observable(),
                     DenseOperator(Matrix(v.adjoint() * o.mat() * v)),
                     1e-10));
  // Expectation on |psi> equals the base expectation on V|psi>.
  PureState psi = test_random_state(4, rng);
  PureState rotated{Vector(v * psi.amplitudes())};
  CHECK(test_expectation(moved->observable(), psi) ==
        Catch::Approx(test_expectation(base->observable(), rotated))
            .margin(1e-10));
  Matrix skew(4, 4);
  skew.setZero();
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(conjugate_measurement(base, skew), validation_error);
}

TEST_CASE("single-control branch carries the interference observable") {
  MeasurementPtr base = spectral_measurement("Z", test_pauli_z());
  Matrix x = test_pauli_x().mat();
  MeasurementPtr plus = hadamard_expand(base, {x}, {1});
  CHECK(plus->tag() == RealizationTag::hadamard_expanded);
  // Values are the base values scaled by 2 per ancilla, plus a 0 outcome.
  REQUIRE(plus->values().size() == 3);
  CHECK(plus->values()[0] == 2.0 * base->values()[0]);
  CHECK(plus->values()[1] == 2.0 * base->values()[1]);
  CHECK(plus->values()[2] == 0.0);
  // Observable is (U+I)^dag O (U+I)/2; for U=X, O=Z this vanishes.
  Matrix expect = 0.5 * (x + Matrix::Identity(2, 2)).adjoint() *
                  test_pauli_z().mat() * (x + Matrix::Identity(2, 2));
  CHECK(approx_equal(plus->observable(), DenseOperator(expect), 1e-12));
  CHECK(plus->observable().frobenius_norm() < 1e-12);
  // Branches on |0> agree, so their difference 2 Re<0|ZX|0> is zero.
  MeasurementPtr minus = hadamard_expand(base, {x}, {-1});
  double p = plus->observable().mat()(0, 0).real();
  double q = minus->observable().mat()(0, 0).real();
  CHECK(p - q == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("expanded effects stay a complete PSD set") {
  std::mt19937_64 rng(23);
  MeasurementPtr base =
      spectral_measurement("obs", test_random_hermitian(4, rng));
  std::vector<Matrix> controls{test_random_unitary(4, rng),
                               test_random_unitary(4, rng)};
  MeasurementPtr two = hadamard_expand(base, controls, {1, -1});
  // Construction already validates PSD and completeness; spot-check the
  // null outcome and the value scaling.
  CHECK(two->values().back() == 0.0);
  for (std::size_t j = 0; j + 1 < two->values().size(); ++j)
    CHECK(two->values()[j] == 4.0 * base->values()[j]);
  // Observable equals V^dag O V with V the sqrt(2)-normalized product.
  Matrix id = Matrix::Identity(4, 4);
  Matrix v = (controls[1] - id) * (controls[0] + id) / 2.0;
  Matrix expect = v.adjoint() * base->observable().mat() * v;
  CHECK(approx_equal(two->observable(), DenseOperator(expect), 1e-10));
}

TEST_CASE("sign-averaged branches recover interference terms") {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 20; ++round) {
    Matrix ua = test_random_unitary(4, rng);
    Matrix ub = test_random_unitary(4, rng);
    DenseOperator o = test_random_hermitian(4, rng);
    PureState psi = test_random_state(4, rng);
    MeasurementPtr base =
        conjugate_measurement(spectral_measurement("obs", o), ua);
    Matrix u = ua.adjoint() * ub;
    Complex target = (psi.amplitudes().adjoint() * ua.adjoint() * o.mat() *
                      ub * psi.amplitudes())(0, 0);

    MeasurementPtr plus = hadamard_expand(base, {u}, {1});
    MeasurementPtr minus = hadamard_expand(base, {u}, {-1});
    double re = 0.5 * (test_expectation(plus->observable(), psi) -
                       test_expectation(minus->observable(), psi));
    CHECK(re == Catch::Approx(target.real()).margin(1e-10));

    // The imaginary part comes from phasing the control by -i.
    Matrix ui = Complex(0, -1) * u;
    MeasurementPtr iplus = hadamard_expand(base, {ui}, {1});
    MeasurementPtr iminus = hadamard_expand(base, {ui}, {-1});
    double im = 0.5 * (test_expectation(iplus->observable(), psi) -
                       test_expectation(iminus->observable(), psi));
    CHECK(im == Catch::Approx(target.imag()).margin(1e-10));
  }
}

TEST_CASE("expansion validates controls and signs") {
  MeasurementPtr base = spectral_measurement("Z", test_pauli_z());
  Matrix x = test_pauli_x().mat();
  Matrix skew(2, 2);
  skew.setZero();
  skew(0, 1) = 1.0;
  CHECK_THROWS_AS(hadamard_expand(base, {skew}, {1}), validation_error);
  CHECK_THROWS_AS(hadamard_expand(base, {x}, {2}), validation_error);
  CHECK_THROWS_AS(hadamard_expand(base, {x}, {1, -1}), validation_error);
  Matrix big = Matrix::Identity(4, 4);
  CHECK_THROWS_AS(hadamard_expand(base, {big}, {1}), validation_error);
}
