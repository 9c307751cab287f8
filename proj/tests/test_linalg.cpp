// Copyright 2026 The Subzero Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>

#include "doctest.h"
#include "subzero/errors.hpp"
#include "subzero/linalg.hpp"
#include "test_util.hpp"

using namespace subzero;
using subzero::testing::gaussian;
using subzero::testing::random_psd;

namespace {

double reconstruction_error(const SymMatrix& a, const EigenDecomp& e) {
  const Matrix r = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
  return (r - a.dense()).norm();
}

}  // namespace

TEST_SUITE("linalg") {
  TEST_CASE("SymMatrix mirrors writes") {
    SymMatrix a(3);
    a.set(0, 2, 5.0);
    CHECK(a(2, 0) == 5.0);
    Matrix m(2, 2);
    m << 1, 2, 99, 3;
    const SymMatrix b = SymMatrix::from_upper(m);
    CHECK(b(1, 0) == 2.0);
    CHECK(b.dense() == b.dense().transpose());
    CHECK_THROWS_AS(SymMatrix::from_upper(Matrix(2, 3)), InputError);
  }

  TEST_CASE("eig_sym of the identity") {
    const auto e = eig_sym(SymMatrix::identity(4));
    for (int i = 0; i < 4; ++i) CHECK(e.eigenvalues[i] == 1.0);
    CHECK((e.eigenvectors.transpose() * e.eigenvectors - Matrix::Identity(4, 4)).norm() < 1e-12);
  }

  TEST_CASE("eig_sym of an already diagonal matrix") {
    const std::vector<double> d{1.0, 3.0};
    const auto e = eig_sym(SymMatrix::diagonal(d));
    CHECK(e.eigenvalues[0] == 3.0);
    CHECK(e.eigenvalues[1] == 1.0);
    CHECK(std::abs(e.eigenvectors(1, 0)) == 1.0);
    CHECK(std::abs(e.eigenvectors(0, 1)) == 1.0);
  }

  TEST_CASE("eig_sym reconstructs random PSD matrices") {
    for (std::size_t n : {6u, 17u, 40u}) {
      const SymMatrix a = random_psd(n, n, 100 + n);
      const auto e = eig_sym(a);
      const double d = static_cast<double>(n);
      CHECK(reconstruction_error(a, e) <= 1e-8 * a.frobenius_norm());
      CHECK((e.eigenvectors.transpose() * e.eigenvectors -
             Matrix::Identity(e.eigenvectors.cols(), e.eigenvectors.cols()))
                .norm() <= 1e-9 * d);
      for (Eigen::Index i = 1; i < e.eigenvalues.size(); ++i) {
        CHECK(e.eigenvalues[i - 1] >= e.eigenvalues[i]);
      }
      // Trace identity and numerical nonnegativity.
      CHECK(std::abs(a.trace() - e.eigenvalues.sum()) <= 1e-9 * a.trace());
      CHECK(e.eigenvalues.minCoeff() >= -1e-9 * e.eigenvalues[0]);
    }
  }

  TEST_CASE("eig_sym agrees with an independent solver") {
    const SymMatrix a = random_psd(12, 5, 7);
    const auto e = eig_sym(a);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(a.dense());
    for (Eigen::Index i = 0; i < 12; ++i) {
      CHECK(e.eigenvalues[i] == doctest::Approx(ref.eigenvalues()[11 - i]).epsilon(1e-9).scale(e.eigenvalues[0]));
    }
  }

  TEST_CASE("eig_sym rejects non-finite input") {
    SymMatrix a(2);
    a.set(0, 1, std::nan(""));
    CHECK_THROWS_AS(eig_sym(a), InputError);
  }

  TEST_CASE("orthonormalize keeps an orthonormal basis") {
    Matrix r = Matrix::Zero(3, 2);
    r(0, 0) = 1.0;
    r(1, 1) = 1.0;
    CHECK((orthonormalize(r) - r).norm() < 1e-15);
  }

  TEST_CASE("orthonormalize matches hand Gram-Schmidt") {
    Matrix r(2, 2);
    r << 1, 1, 0, 1;  // columns (1,0) and (1,1)
    const Matrix u = orthonormalize(r);
    CHECK(u(0, 0) == doctest::Approx(1.0));
    CHECK(u(1, 0) == doctest::Approx(0.0));
    CHECK(std::abs(u(0, 1)) < 1e-15);
    CHECK(std::abs(u(1, 1)) == doctest::Approx(1.0));
    // Sign convention: first nonzero entry positive.
    CHECK(u(1, 1) > 0.0);
  }

  TEST_CASE("orthonormalize random input") {
    const Matrix r = gaussian(8, 3, 21);
    const Matrix u = orthonormalize(r);
    CHECK((u.transpose() * u - Matrix::Identity(3, 3)).norm() <= 1e-10);
    // Same span: projecting R onto span(U) leaves nothing.
    CHECK((r - u * (u.transpose() * r)).norm() <= 1e-10 * r.norm());
  }

  TEST_CASE("orthonormalize names the dependent column") {
    Matrix r(4, 3);
    r.col(0) << 1, 2, 3, 4;
    r.col(1) << 0, 1, 0, 0;
    r.col(2) = 2.0 * r.col(0) - r.col(1);
    try {
      orthonormalize(r);
      FAIL("expected InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
    CHECK_THROWS_AS(orthonormalize(Matrix::Ones(2, 3)), InputError);
  }

  TEST_CASE("srank examples") {
    CHECK(srank(Matrix::Identity(5, 5)) == doctest::Approx(5.0));
    Vector u = Vector::Ones(4).normalized();
    CHECK(srank(u * u.transpose()) == doctest::Approx(1.0));
    Matrix d = Matrix::Zero(3, 3);
    d.diagonal() << 2, 1, 1;
    CHECK(srank(d) == doctest::Approx(1.5));
    CHECK_THROWS_AS(srank(Matrix::Zero(3, 3)), InputError);
  }

  TEST_CASE("intdim examples") {
    CHECK(intdim(SymMatrix::identity(7)) == doctest::Approx(7.0));
    const std::vector<double> d{2, 1, 1};
    CHECK(intdim(SymMatrix::diagonal(d)) == doctest::Approx(2.0));
    CHECK_THROWS_AS(intdim(SymMatrix(3)), InputError);
  }

  TEST_CASE("srank and intdim are scale invariant and bounded") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SymMatrix a = random_psd(9, 4, seed);
      for (double c : {1e-3, 1e3}) {
        CHECK(srank(a.scaled(c).dense()) == doctest::Approx(srank(a.dense())).epsilon(1e-12));
        CHECK(intdim(a.scaled(c)) == doctest::Approx(intdim(a)).epsilon(1e-12));
      }
      CHECK(srank(a.dense()) >= 1.0 - 1e-12);
      CHECK(srank(a.dense()) <= 4.0 + 1e-9);
      CHECK(intdim(a) >= 1.0 - 1e-12);
      CHECK(intdim(a) <= 9.0);
    }
  }
}
