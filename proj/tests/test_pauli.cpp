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

#include "demesst/pauli.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "demesst/stabilizer.hpp"
#include "test_util.hpp"

using namespace demesst;

TEST_CASE("pauli parsing and display round-trip") {
  CHECK(PauliString::from_string("XIZ").to_string() == "XIZ");
  CHECK(PauliString::from_string("-Y").to_string() == "-Y");
  CHECK(PauliString::from_string("iXZ").to_string() == "iXZ");
  CHECK(PauliString::from_string("-iZZ").to_string() == "-iZZ");
  CHECK(PauliString::from_string("Y").is_hermitian());
  CHECK_FALSE(PauliString::from_string("iZ").is_hermitian());
  CHECK_THROWS_AS(PauliString::from_string("XQ"), validation_error);
}

TEST_CASE("single-letter dense realizations match fixtures") {
  CHECK(approx_equal(PauliString::from_string("X").dense(), test_pauli_x()));
  CHECK(approx_equal(PauliString::from_string("Y").dense(), test_pauli_y()));
  CHECK(approx_equal(PauliString::from_string("Z").dense(), test_pauli_z()));
}

TEST_CASE("pauli_mul hand cases") {
  auto X = PauliString::from_string("X");
  auto Z = PauliString::from_string("Z");
  CHECK(pauli_mul(X, Z).to_string() == "-iY");
  CHECK(pauli_mul(Z, Z).to_string() == "I");

  auto a = PauliString::from_string("XZ");
  auto b = PauliString::from_string("ZZ");
  CHECK(pauli_mul(a, b).to_string() == "-iYI");
}

TEST_CASE("pauli_mul agrees with dense multiplication on all 256 pairs") {
  for (int i = 0; i < 16; ++i) {
    for (int j = 0; j < 16; ++j) {
      // Index 0 is the identity; from_family_index covers 1..15, so
      // build via raw bits to include it.
      PauliString p = PauliString::hermitian(2, (i >> 2) & 3, 0);
      p = pauli_mul(p, PauliString::hermitian(2, 0, i & 3));
      PauliString q = PauliString::hermitian(2, (j >> 2) & 3, 0);
      q = pauli_mul(q, PauliString::hermitian(2, 0, j & 3));
      Matrix expect = p.dense().mat() * q.dense().mat();
      Matrix got = pauli_mul(p, q).dense().mat();
      REQUIRE((expect - got).cwiseAbs().maxCoeff() <= 1e-14);
    }
  }
}

TEST_CASE("adjoint and apply are consistent with dense forms") {
  auto p = PauliString::from_string("iXY");
  CHECK(approx_equal(p.adjoint().dense(),
                     DenseOperator(p.dense().mat().adjoint())));

  Vector v(4);
  v << Complex(0.2, 0.1), Complex(-0.4, 0.0), Complex(0.0, 0.7),
      Complex(0.5, -0.1);
  CHECK((p.apply(v) - p.dense().mat() * v).norm() < 1e-14);

  Matrix o = Matrix::Random(4, 4);
  CHECK(std::abs(p.trace_with(DenseOperator(o.selfadjointView<Eigen::Upper>())) -
                 (p.dense().mat() *
                  Matrix(o.selfadjointView<Eigen::Upper>()))
                     .trace()) < 1e-12);
}

TEST_CASE("family index enumeration is bijective and Hermitian") {
  for (long long i = 1; i < 64; ++i) {
    PauliString p = PauliString::from_family_index(3, i);
    CHECK(p.is_hermitian());
    // +1/-1 spectrum: P^2 = I.
    CHECK(pauli_mul(p, p).to_string() == "III");
  }
  CHECK(PauliString::from_family_index(2, 1).to_string() == "IX");
  CHECK(PauliString::from_family_index(2, 4).to_string() == "XI");
  CHECK(PauliString::from_family_index(2, 15).to_string() == "ZZ");
}

TEST_CASE("commutation matches the symplectic form") {
  auto XX = PauliString::from_string("XX");
  auto ZZ = PauliString::from_string("ZZ");
  auto XI = PauliString::from_string("XI");
  CHECK(XX.commutes_with(ZZ));
  CHECK_FALSE(XI.commutes_with(ZZ));
}

TEST_CASE("stabilizer groups validate and enumerate exactly") {
  StabilizerGroup ghz({PauliString::from_string("XXX"),
                       PauliString::from_string("ZZI"),
                       PauliString::from_string("IZZ")});
  CHECK(ghz.full_rank());
  CHECK(ghz.elements().size() == 8);

  // Every element must stabilize the extracted state.
  PureState psi = ghz.state_vector();
  for (const auto& s : ghz.elements())
    CHECK((s.apply(psi.amplitudes()) - psi.amplitudes()).norm() < 1e-12);

  // GHZ amplitudes: (|000> + |111>)/sqrt(2).
  CHECK(std::abs(psi.amplitudes()(0) - 1.0 / std::sqrt(2.0)) < 1e-12);
  CHECK(std::abs(psi.amplitudes()(7) - 1.0 / std::sqrt(2.0)) < 1e-12);

  CHECK_THROWS_AS(StabilizerGroup({PauliString::from_string("XI"),
                                   PauliString::from_string("ZI")}),
                  validation_error);  // anticommuting
  CHECK_THROWS_AS(StabilizerGroup({PauliString::from_string("ZI"),
                                   PauliString::from_string("ZI")}),
                  validation_error);  // dependent
  CHECK_THROWS_AS(StabilizerGroup({PauliString::from_string("iZI")}),
                  validation_error);  // non-Hermitian phase
}

TEST_CASE("signed stabilizer generators select the right basis state") {
  StabilizerGroup one({PauliString::from_string("-Z")});
  PureState psi = one.state_vector();
  CHECK(std::abs(psi.amplitudes()(1) - 1.0) < 1e-12);

  CHECK(one.contains_letters(0, 1));
  CHECK(one.element_phase(0, 1) == 2);  // -Z stored as i^2 Z
  CHECK_FALSE(one.contains_letters(1, 0));
}

TEST_CASE("group projector equals the dense average of elements") {
  StabilizerGroup g({PauliString::from_string("ZI"),
                     PauliString::from_string("IZ")});
  DenseOperator p = g.projector();
  CHECK(p.is_hermitian());
  CHECK(std::abs(p.trace() - Complex(1, 0)) < 1e-12);
  CHECK(approx_equal(p, test_ket(4, 0).projector()));
}
