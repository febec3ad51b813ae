#include "vmma/quadrature.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <vector>

using namespace vmma;

TEST_CASE("one-point rule is the midpoint rule") {
  const QuadRule1D r = gauss_legendre_rule(1);
  REQUIRE(r.size() == 1);
  CHECK(r.nodes[0] == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.weights[0] == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("two-point rule hits the roots of L_2") {
  const QuadRule1D r = gauss_legendre_rule(2);
  CHECK(r.nodes[0] == doctest::Approx(-0.5773502692).epsilon(1e-9));
  CHECK(r.nodes[1] == doctest::Approx(0.5773502692).epsilon(1e-9));
  CHECK(r.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r.weights[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rules reject n = 0") { CHECK_THROWS_AS(gauss_legendre_rule(0), std::invalid_argument); }

TEST_CASE("weights are positive, nodes increasing, sum of weights = 2") {
  for (int n = 1; n <= 24; ++n) {
    const QuadRule1D r = gauss_legendre_rule(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(r.weights[i] > 0.0);
      if (i) CHECK(r.nodes[i] > r.nodes[i - 1]);
      sum += r.weights[i];
    }
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
  }
}

TEST_CASE("n-point rule integrates monomials up to degree 2n-1") {
  for (int n = 1; n <= 20; ++n) {
    const QuadRule1D r = gauss_legendre_rule(n);
    for (int d = 0; d <= 2 * n - 1; ++d) {
      double q = 0.0;
      for (int i = 0; i < n; ++i) q += r.weights[i] * std::pow(r.nodes[i], d);
      const double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
      if (exact == 0.0) CHECK(std::abs(q) < 1e-13);
      else CHECK(std::abs(q - exact) < 1e-13 * std::abs(exact));
    }
  }
}

TEST_CASE("map_rule scales nodes and weights") {
  const QuadRule1D r1 = map_rule(gauss_legendre_rule(1), 0.0, 1.0);
  CHECK(r1.nodes[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(r1.weights[0] == doctest::Approx(1.0).epsilon(1e-15));

  const QuadRule1D r2 = map_rule(gauss_legendre_rule(2), 0.0, 1.0);
  CHECK(r2.nodes[0] == doctest::Approx(0.2113248654).epsilon(1e-9));
  CHECK(r2.nodes[1] == doctest::Approx(0.7886751346).epsilon(1e-9));

  const QuadRule1D r7 = map_rule(gauss_legendre_rule(7), -2.0, 3.5);
  double sum = 0.0;
  for (double w : r7.weights) sum += w;
  CHECK(sum == doctest::Approx(5.5).epsilon(1e-14));

  CHECK_THROWS_AS(map_rule(r1, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("legendre values and closed forms") {
  const std::vector<double> pts = {0.5};
  const Basis1DTable t = tabulate_basis_1d(BasisKind::legendre, 5, pts);
  CHECK(t.value(3, 0) == doctest::Approx(-0.4375).epsilon(1e-14)); // (5x^3-3x)/2 at 0.5
  // L_k(1) = 1 for all k
  const std::vector<double> one = {1.0};
  const Basis1DTable t1 = tabulate_basis_1d(BasisKind::legendre, 8, one);
  for (int k = 0; k <= 8; ++k) CHECK(t1.value(k, 0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("three-term recurrence residual vanishes") {
  const QuadRule1D r = gauss_legendre_rule(9);
  const Basis1DTable t = tabulate_basis_1d(BasisKind::legendre, 12, r.nodes);
  for (int k = 1; k <= 11; ++k) {
    for (int p = 0; p < r.size(); ++p) {
      const double res = (k + 1) * t.value(k + 1, p) -
                         (2 * k + 1) * r.nodes[p] * t.value(k, p) + k * t.value(k - 1, p);
      CHECK(std::abs(res) < 1e-12);
    }
  }
}

TEST_CASE("shen interior combinations vanish at the endpoints") {
  const std::vector<double> ends = {-1.0, 1.0};
  const Basis1DTable t = tabulate_basis_1d(BasisKind::shen_interior, 9, ends);
  for (int k = 0; k <= 9; ++k) {
    CHECK(std::abs(t.value(k, 0)) < 1e-14);
    CHECK(std::abs(t.value(k, 1)) < 1e-14);
  }
}

TEST_CASE("hermite cubic shapes") {
  const std::vector<double> pts = {0.5};
  const Basis1DTable t = tabulate_basis_1d(BasisKind::hermite_cubic, 3, pts);
  CHECK(t.value(0, 0) == doctest::Approx(0.5).epsilon(1e-14));   // 2t^3-3t^2+1
  CHECK(t.value(1, 0) == doctest::Approx(0.125).epsilon(1e-14)); // t^3-2t^2+t
  // the two value shapes sum to 1 everywhere
  const QuadRule1D r = map_rule(gauss_legendre_rule(7), 0.0, 1.0);
  const Basis1DTable tq = tabulate_basis_1d(BasisKind::hermite_cubic, 3, r.nodes);
  for (int p = 0; p < r.size(); ++p)
    CHECK(tq.value(0, p) + tq.value(2, p) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("points outside the reference interval are rejected") {
  const std::vector<double> bad = {1.5};
  CHECK_THROWS_AS(tabulate_basis_1d(BasisKind::legendre, 3, bad), std::invalid_argument);
  CHECK_THROWS_AS(tabulate_basis_1d(BasisKind::hermite_cubic, 3, bad), std::invalid_argument);
}

TEST_CASE("tabulated first derivatives match central differences") {
  const QuadRule1D r = gauss_legendre_rule(6);
  std::vector<double> interior;
  for (double x : r.nodes)
    if (std::abs(x) < 0.99) interior.push_back(x);
  const double step = 1e-5;
  for (BasisKind kind : {BasisKind::legendre, BasisKind::shen_interior}) {
    const int maxi = 7;
    const Basis1DTable t = tabulate_basis_1d(kind, maxi, interior);
    for (size_t p = 0; p < interior.size(); ++p) {
      const std::vector<double> lo = {interior[p] - step}, hi = {interior[p] + step};
      const Basis1DTable tlo = tabulate_basis_1d(kind, maxi, lo);
      const Basis1DTable thi = tabulate_basis_1d(kind, maxi, hi);
      for (int i = 0; i <= maxi; ++i) {
        const double fd = (thi.value(i, 0) - tlo.value(i, 0)) / (2 * step);
        CHECK(std::abs(t.d1(i, p) - fd) < 1e-7);
      }
    }
  }
}

TEST_CASE("lobatto points bracket the interval and are symmetric") {
  for (int n : {2, 5, 12}) {
    const std::vector<double> pts = lobatto_points(n);
    REQUIRE(static_cast<int>(pts.size()) == n + 1);
    CHECK(pts.front() == -1.0);
    CHECK(pts.back() == 1.0);
    for (int i = 0; i <= n; ++i)
      CHECK(pts[i] == doctest::Approx(-pts[n - i]).epsilon(1e-13));
  }
}
