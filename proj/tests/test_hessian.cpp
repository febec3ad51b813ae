#include "vmma/hessian.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace vmma;

TEST_CASE("determinants") {
  SymMat a = SymMat::identity(2);
  a(0, 0) = a(1, 1) = 2.0;
  CHECK(hessian_det(a) == doctest::Approx(4.0));

  SymMat b = SymMat::zero(2);
  b(0, 0) = 12.0;
  b(1, 1) = 2.0;
  CHECK(hessian_det(b) == doctest::Approx(24.0)); // D^2(x^4+y^2) at (1,1)

  CHECK(hessian_det(SymMat::identity(3)) == doctest::Approx(1.0));
}

TEST_CASE("2x2 cofactor swaps the diagonal and negates the off-diagonal") {
  SymMat h = SymMat::zero(2);
  h(0, 0) = 3.0;
  h(1, 1) = 5.0;
  h(0, 1) = h(1, 0) = 2.0;
  const SymMat c = cofactor(h);
  CHECK(c(0, 0) == doctest::Approx(5.0));
  CHECK(c(1, 1) == doctest::Approx(3.0));
  CHECK(c(0, 1) == doctest::Approx(-2.0));
  CHECK(c(1, 0) == doctest::Approx(-2.0));
}

TEST_CASE("diag(1,2,3) cofactor") {
  SymMat h = SymMat::zero(3);
  h(0, 0) = 1;
  h(1, 1) = 2;
  h(2, 2) = 3;
  const SymMat c = cofactor(h);
  CHECK(c(0, 0) == doctest::Approx(6.0));
  CHECK(c(1, 1) == doctest::Approx(3.0));
  CHECK(c(2, 2) == doctest::Approx(2.0));
}

TEST_CASE("H cof(H)^T = det(H) I for random symmetric matrices") {
  auto gen = testing::rng(17);
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 50; ++trial) {
      const SymMat h = testing::random_symmetric(gen, dim);
      const SymMat c = cofactor(h);
      const double det = hessian_det(h);
      for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
          double s = 0.0;
          for (int k = 0; k < dim; ++k) s += h(i, k) * c(j, k);
          CHECK(std::abs(s - (i == j ? det : 0.0)) < 1e-12);
        }
      }
    }
  }
}

TEST_CASE("det(H) = (1/n) cof(H) : H") {
  auto gen = testing::rng(23);
  for (int dim : {2, 3}) {
    for (int trial = 0; trial < 50; ++trial) {
      const SymMat h = testing::random_symmetric(gen, dim);
      CHECK(std::abs(hessian_det(h) - contract(cofactor(h), h) / dim) < 1e-12);
    }
  }
}

TEST_CASE("minimum eigenvalue") {
  SymMat saddle = SymMat::zero(2);
  saddle(0, 0) = 2.0;
  saddle(1, 1) = -2.0;
  CHECK(min_eigenvalue(saddle) == doctest::Approx(-2.0));

  CHECK(min_eigenvalue(SymMat::identity(3)) == doctest::Approx(1.0));

  // 3x3 against the characteristic polynomial on a known case
  SymMat h = SymMat::zero(3);
  h(0, 0) = 2;
  h(1, 1) = 3;
  h(2, 2) = 4;
  h(0, 1) = h(1, 0) = 1;
  // eigenvalues of [[2,1,0],[1,3,0],[0,0,4]]: (5 +- sqrt(5))/2 and 4
  CHECK(min_eigenvalue(h) == doctest::Approx((5.0 - std::sqrt(5.0)) / 2).epsilon(1e-12));
}
