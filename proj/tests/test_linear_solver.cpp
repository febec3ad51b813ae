#include "vmma/linear_solver.hpp"

#include "vmma/exec.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <random>

using namespace vmma;

namespace {

std::vector<double> residual(const DenseMatrix& a, const std::vector<double>& x,
                             const std::vector<double>& b) {
  std::vector<double> ax;
  matvec(a, x, ax);
  for (size_t i = 0; i < ax.size(); ++i) ax[i] -= b[i];
  return ax;
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

} // namespace

TEST_CASE("identity and a 2x2 hand solve") {
  DenseMatrix eye(3, 3);
  for (int i = 0; i < 3; ++i) eye(i, i) = 1.0;
  const std::vector<double> b{1.5, -2.0, 0.25};
  CHECK(solve(factor(eye), b) == b);

  DenseMatrix a(2, 2);
  a(0, 0) = 2;
  a(0, 1) = 1;
  a(1, 0) = 1;
  a(1, 1) = 3;
  const std::vector<double> x = solve(factor(a), std::vector<double>{3.0, 4.0});
  CHECK(x[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(x[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("zero right-hand side gives the zero solution") {
  DenseMatrix a(4, 4);
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (auto& v : a.a) v = dist(gen);
  for (int i = 0; i < 4; ++i) a(i, i) += 4.0;
  const std::vector<double> x = solve(factor(a), std::vector<double>(4, 0.0));
  for (double v : x) CHECK(v == 0.0);
}

TEST_CASE("hilbert 6x6 passes the residual check despite conditioning") {
  const int n = 6;
  DenseMatrix h(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) h(i, j) = 1.0 / (i + j + 1);
  std::vector<double> b(n, 1.0);
  const Factorization f = factor(h);
  const std::vector<double> x = solve(f, b);
  const double bound = 1e-10 * (h.inf_norm() * max_abs(x) + max_abs(b));
  CHECK(max_abs(residual(h, x, b)) <= bound);
}

TEST_CASE("round-trip recovery for a well-conditioned system") {
  const int n = 80;
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> dist(-1, 1);
  DenseMatrix a(n, n);
  for (auto& v : a.a) v = 0.1 * dist(gen);
  for (int i = 0; i < n; ++i) a(i, i) += 2.0;
  std::vector<double> x0(n);
  for (auto& v : x0) v = dist(gen);
  std::vector<double> b;
  matvec(a, x0, b);
  const std::vector<double> x = solve(factor(a), b);
  for (int i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(x0[i]).epsilon(1e-10));
}

TEST_CASE("repeated solves on one factorization are bit-identical") {
  const int n = 40;
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  DenseMatrix a(n, n);
  for (auto& v : a.a) v = dist(gen);
  for (int i = 0; i < n; ++i) a(i, i) += 5.0;
  std::vector<double> b(n);
  for (auto& v : b) v = dist(gen);
  const Factorization f = factor(a);
  const std::vector<double> x1 = solve(f, b);
  const std::vector<double> x2 = solve(f, b);
  CHECK(x1 == x2);
}

TEST_CASE("singular matrices raise with the pivot index") {
  DenseMatrix a(3, 3);
  a(0, 0) = 1;
  a(0, 1) = 2;
  a(1, 0) = 2;
  a(1, 1) = 4; // rows 0,1 dependent
  a(2, 2) = 1;
  try {
    factor(a);
    FAIL("expected SingularMatrixError");
  } catch (const SingularMatrixError& e) {
    CHECK(e.pivot_index >= 0);
    CHECK(e.pivot_index < 3);
  }
}

TEST_CASE("dimension mismatch is rejected") {
  DenseMatrix a(2, 2);
  a(0, 0) = a(1, 1) = 1;
  CHECK_THROWS_AS(solve(factor(a), std::vector<double>{1.0, 2.0, 3.0}),
                  std::invalid_argument);
}

TEST_CASE("blocked factorization agrees with the reference") {
  const int n = 193; // not a multiple of the block size
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> dist(-1, 1);
  DenseMatrix a(n, n);
  for (auto& v : a.a) v = dist(gen);
  for (int i = 0; i < n; ++i) a(i, i) += 3.0;
  std::vector<double> b(n);
  for (auto& v : b) v = dist(gen);
  const std::vector<double> xb = solve(factor(a), b);
  const std::vector<double> xr = solve(factor_reference(a), b);
  for (int i = 0; i < n; ++i) CHECK(xb[i] == doctest::Approx(xr[i]).epsilon(1e-11));

  // the parallel path computes entries in the same order as serial
  exec::set_mode(exec::Mode::serial);
  const Factorization fs = factor(a);
  exec::set_mode(exec::Mode::parallel);
  const Factorization fp = factor(a);
  CHECK(fs.lu.a == fp.lu.a);
}

TEST_CASE("banded path matches the dense path") {
  const int n = 60, band = 7;
  std::mt19937_64 gen(13);
  std::uniform_real_distribution<double> dist(-1, 1);
  CsrMatrix c;
  c.n = n;
  c.row_ptr.assign(n + 1, 0);
  DenseMatrix d(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = std::max(0, i - band); j <= std::min(n - 1, i + band); ++j) {
      double v = dist(gen);
      if (i == j) v += 6.0;
      c.col.push_back(j);
      c.val.push_back(v);
      d(i, j) = v;
    }
    c.row_ptr[i + 1] = static_cast<int>(c.col.size());
  }
  std::vector<double> b(n);
  for (auto& v : b) v = dist(gen);
  const Factorization fb = factor(c);
  CHECK(fb.storage == Factorization::Storage::banded);
  const std::vector<double> xb = solve(fb, b);
  const std::vector<double> xd = solve(factor(d), b);
  for (int i = 0; i < n; ++i) CHECK(xb[i] == doctest::Approx(xd[i]).epsilon(1e-10));
}
