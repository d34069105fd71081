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

#include "demesst/core.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "test_util.hpp"

using namespace demesst;

TEST_CASE("hilbert specs compute dimensions and enforce the cap") {
  CHECK(HilbertSpec::qubits(3).dimension() == 8);
  CHECK(HilbertSpec::qubits(12).dimension() == 4096);
  CHECK(HilbertSpec::bosonic(2, 30).dimension() == 900);
  CHECK_THROWS_AS(HilbertSpec::qubits(13), validation_error);
  CHECK_THROWS_AS(HilbertSpec::bosonic(1, 1), validation_error);
  CHECK_THROWS_AS(HilbertSpec::bosonic(2, 70), validation_error);
}

TEST_CASE("tensor_product matches hand-computed kroneckers") {
  DenseOperator i2 = DenseOperator::identity(2);
  CHECK(approx_equal(tensor_product(i2, i2), DenseOperator::identity(4)));

  DenseOperator z = test_pauli_z();
  Matrix zi = Matrix::Zero(4, 4);
  zi.diagonal() << 1, 1, -1, -1;
  CHECK(approx_equal(tensor_product(z, i2), DenseOperator(zi)));

  DenseOperator p0 = test_ket(2, 0).projector();
  DenseOperator p1 = test_ket(2, 1).projector();
  Matrix d = Matrix::Zero(4, 4);
  d(1, 1) = 1;
  CHECK(approx_equal(tensor_product(p0, p1), DenseOperator(d)));
}

TEST_CASE("tensor_product propagates hermiticity and is associative") {
  DenseOperator x = test_pauli_x();
  DenseOperator y = test_pauli_y();
  DenseOperator z = test_pauli_z();
  CHECK(tensor_product(x, z).is_hermitian());

  auto left = tensor_product(tensor_product(x, y), z);
  auto right = tensor_product(x, tensor_product(y, z));
  CHECK((left.mat() - right.mat()).cwiseAbs().maxCoeff() <= 1e-14);

  Matrix nh(2, 2);
  nh << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
  CHECK_FALSE(tensor_product(DenseOperator(nh), z).is_hermitian());
}

TEST_CASE("hs_inner on pauli pairs and the magic projector") {
  DenseOperator x = test_pauli_x();
  DenseOperator z = test_pauli_z();
  CHECK(std::abs(hs_inner(z, z) - Complex(2, 0)) < 1e-14);
  CHECK(std::abs(hs_inner(x, z)) < 1e-14);

  // <0|0> overlap with the +1 eigenprojector of (X+Y+Z)/sqrt(3).
  DenseOperator magic = test_magic_projector();
  Complex v = hs_inner(test_ket(2, 0).projector(), magic);
  CHECK(std::abs(v - Complex((1.0 + 1.0 / std::sqrt(3.0)) / 2.0, 0)) < 1e-12);
}

TEST_CASE("traceless_part subtracts the trace share and is idempotent") {
  DenseOperator i2 = DenseOperator::identity(2);
  CHECK(traceless_part(i2).frobenius_norm() < 1e-14);

  DenseOperator halfz = traceless_part(test_ket(2, 0).projector());
  CHECK(approx_equal(halfz, DenseOperator(0.5 * test_pauli_z().mat())));

  DenseOperator z = test_pauli_z();
  CHECK(approx_equal(traceless_part(z), z));
  CHECK(approx_equal(traceless_part(traceless_part(halfz)), halfz));
  CHECK(std::abs(traceless_part(halfz).trace()) < 1e-12);

  Matrix nh(2, 2);
  nh << Complex(0, 0), Complex(1, 0), Complex(0, 0), Complex(0, 0);
  CHECK_THROWS_AS(traceless_part(DenseOperator(nh)), validation_error);
}

TEST_CASE("pseudoinverse_norm closed forms") {
  CHECK(pseudoinverse_norm(DenseOperator::identity(3)) == Catch::Approx(1.0));

  double c = std::cos(0.3);
  Matrix g(2, 2);
  g << 1, c, c, 1;
  CHECK(pseudoinverse_norm(DenseOperator(g)) ==
        Catch::Approx(1.0 / (1.0 - c)).epsilon(1e-12));

  Matrix ones(2, 2);
  ones << 1, 1, 1, 1;
  CHECK(pseudoinverse_norm(DenseOperator(ones)) == Catch::Approx(0.5));

  Matrix neg(2, 2);
  neg << 1, 0, 0, -1;
  CHECK_THROWS_AS(pseudoinverse_norm(DenseOperator(neg)), validation_error);
}

TEST_CASE("pseudoinverse_norm times smallest retained eigenvalue is 1") {
  Matrix g(3, 3);
  g << 2.0, 0.3, 0.1, 0.3, 1.5, 0.2, 0.1, 0.2, 0.9;
  DenseOperator gd(g);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  double smallest = es.eigenvalues()(0);
  CHECK(std::abs(pseudoinverse_norm(gd) * smallest - 1.0) < 1e-10);
}

TEST_CASE("pure states normalize and record the raw norm") {
  Vector v(2);
  v << 3.0, 4.0;
  PureState s(v);
  CHECK(s.norm_record() == Catch::Approx(5.0));
  CHECK(s.amplitudes().norm() == Catch::Approx(1.0));

  PureState raw(v, /*normalize=*/false);
  CHECK(raw.amplitudes().norm() == Catch::Approx(5.0));
}
