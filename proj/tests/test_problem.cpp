#include "vmma/problem.hpp"

#include "support.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>

using namespace vmma;

TEST_CASE("builtin ids") {
  for (const char* id : {"test1a", "test1b", "test2a", "test2b", "test3a", "test3b"}) {
    const ProblemSpec p = builtin_problem(id);
    CHECK(p.id == id);
    CHECK(p.dim == 2);
    CHECK(p.exact.has_value());
  }
  CHECK_THROWS_AS(builtin_problem("test9z"), std::invalid_argument);
}

TEST_CASE("printed right-hand sides") {
  CHECK(builtin_problem("test2a").f({0.5, 0.5, 0}, 0.001) ==
        doctest::Approx(68.4225).epsilon(1e-12));
  CHECK(builtin_problem("test1b").f({1, 1, 0}, 0.0) == doctest::Approx(24.0));
  CHECK(builtin_problem("test1a").f({0, 0, 0}, 0.0) == doctest::Approx(1.0));
  CHECK(builtin_problem("test3b").f({1, 1, 0}, 0.123) == doctest::Approx(18000.0));
}

TEST_CASE("manufactured residuals") {
  const std::vector<Point> grid = interior_grid(builtin_problem("test2a").domain, 5);
  SUBCASE("test2a and test2b satisfy the regularized PDE") {
    for (double eps : {0.1, 0.003, 1e-5}) {
      CHECK(verify_manufactured(builtin_problem("test2a"), eps, grid) < 1e-10);
      CHECK(verify_manufactured(builtin_problem("test2b"), eps, grid) < 1e-10);
    }
  }
  SUBCASE("limit solutions leave the regularization residual") {
    // biharmonic of x^4 + y^2 is the constant 24
    CHECK(verify_manufactured(builtin_problem("test1b"), 0.01, grid) ==
          doctest::Approx(0.24).epsilon(1e-12));
  }
  SUBCASE("missing exact data is an error") {
    ProblemSpec bare;
    bare.domain.dim = 2;
    bare.f = [](const Point&, double) { return 1.0; };
    CHECK_THROWS_AS(verify_manufactured(bare, 0.1, grid), std::logic_error);
  }
}

TEST_CASE("test1a identity det(D^2 u0) = f") {
  const ProblemSpec p = builtin_problem("test1a");
  auto gen = testing::rng(31);
  std::uniform_real_distribution<double> dist(0, 1);
  for (int t = 0; t < 100; ++t) {
    const Point x{dist(gen), dist(gen), 0};
    CHECK(std::abs(hessian_det(p.exact->hess(x, 0)) - p.f(x, 0)) < 1e-12);
  }
}

TEST_CASE("boundary data consistency") {
  auto gen = testing::rng(37);
  std::uniform_real_distribution<double> dist(0, 1);
  auto boundary_point = [&](int t) {
    Point x{dist(gen), dist(gen), 0};
    const int side = t % 4;
    x[side / 2] = (side % 2) ? 1.0 : 0.0;
    return x;
  };
  for (const char* id : {"test1a", "test1b", "test2a", "test2b", "test3a", "test3b"}) {
    const ProblemSpec p = builtin_problem(id);
    for (int t = 0; t < 100; ++t) {
      const Point x = boundary_point(t);
      CHECK(std::abs(p.g(x) - p.exact->u(x, 0.01)) < 1e-12);
      if (p.exact_kind == ExactKind::solves_regularized_problem) {
        // the printed phi^eps equals the Laplacian trace of u^eps
        CHECK(std::abs(p.q_value(x, 0.01) - p.exact->laplacian(x, 0.01)) < 1e-12);
      }
    }
  }
}

TEST_CASE("f stays nonnegative on the built-in problems") {
  auto gen = testing::rng(41);
  std::uniform_real_distribution<double> dist(0, 1);
  for (const char* id : {"test1a", "test1b", "test3a", "test3b"}) {
    const ProblemSpec p = builtin_problem(id);
    for (int t = 0; t < 200; ++t) {
      const Point x{dist(gen), dist(gen), 0};
      CHECK(p.f(x, 0.0) >= 0.0); // degenerate zeros on the axes are data, not errors
    }
  }
}

TEST_CASE("default q is the constant eps") {
  const ProblemSpec p = builtin_problem("test1a");
  CHECK(p.q_value({0, 0.5, 0}, 0.25) == 0.25);
  const ProblemSpec m = builtin_problem("test2a");
  CHECK(m.q_value({1.0, 1.0, 0}, 0.25) == doctest::Approx(630.0));
}
