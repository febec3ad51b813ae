#pragma once

#include "vmma/problem.hpp"

#include <random>

// Shared helpers for the test suites.

namespace vmma::testing {

// f = 1, g = (x^2+y^2)/2, q = 2: the exact solution (x^2+y^2)/2 is a
// quadratic, lies in every space, and makes every residual term cancel.
inline ProblemSpec quadratic_problem() {
  ProblemSpec p;
  p.id = "quadratic";
  p.domain.dim = 2;
  p.f = [](const Point&, double) { return 1.0; };
  p.g = [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); };
  p.grad_g = [](const Point& x) { return Point{x[0], x[1], 0.0}; };
  p.q = [](const Point&, double) { return 2.0; };
  ExactSolution e;
  e.u = [](const Point& x, double) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); };
  e.grad = [](const Point& x, double) { return Point{x[0], x[1], 0.0}; };
  e.hess = [](const Point&, double) { return SymMat::identity(2); };
  e.laplacian = [](const Point&, double) { return 2.0; };
  e.biharmonic = [](const Point&, double) { return 0.0; };
  p.exact = e;
  p.exact_kind = ExactKind::solves_regularized_problem;
  return p;
}

inline std::mt19937_64 rng(uint64_t seed = 0x5eed) { return std::mt19937_64(seed); }

inline SymMat random_symmetric(std::mt19937_64& gen, int dim, double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  SymMat h = SymMat::zero(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) h(i, j) = h(j, i) = dist(gen);
  return h;
}

inline DofVector random_state(std::mt19937_64& gen, const FunctionSpace& space,
                              double scale = 1.0) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  DofVector v = zero_dof_vector(space);
  for (double& c : v.coeffs) c = dist(gen);
  return v;
}

} // namespace vmma::testing
