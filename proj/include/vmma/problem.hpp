#pragma once

#include "vmma/space.hpp"

#include <functional>
#include <optional>
#include <string>

// Continuous problem definitions for
//   -eps Lap^2 u + det(D^2 u) = f   in Omega,
//   u = g,  Lap u = q              on the boundary,
// with q = eps by default. Built-in cases carry analytic derivatives
// through fourth order so residual checks need no numerical
// differentiation.

namespace vmma {

enum class ExactKind { none, solves_limit_problem, solves_regularized_problem };

struct ExactSolution {
  std::function<double(const Point&, double)> u;
  std::function<Point(const Point&, double)> grad;
  std::function<SymMat(const Point&, double)> hess;
  std::function<double(const Point&, double)> laplacian;
  std::function<double(const Point&, double)> biharmonic; // Lap^2 u
};

struct ProblemSpec {
  std::string id;
  int dim = 2;
  BoxDomain domain;

  std::function<double(const Point&, double)> f; // f(x; eps)

  std::function<double(const Point&)> g;
  std::function<Point(const Point&)> grad_g;

  // boundary Laplacian data; nullptr means the default q == eps
  std::function<double(const Point&, double)> q;

  std::optional<ExactSolution> exact;
  ExactKind exact_kind = ExactKind::none;

  double q_value(const Point& x, double eps) const { return q ? q(x, eps) : eps; }
};

// Built-in cases on [0,1]^2:
//   test1a  u0 = exp((x^2+y^2)/2),  f = (1+x^2+y^2) exp(x^2+y^2)
//   test1b  u0 = x^4 + y^2,         f = 24 x^2
//   test2a  manufactured u^eps = 20x^6 + y^6
//   test2b  manufactured u^eps = x sin x + y sin y
//   test3a  same data as test1b
//   test3b  u0 = 20x^6 + y^6,       f = 18000 x^4 y^4
ProblemSpec builtin_problem(const std::string& id);

// Max over the samples of |-eps Lap^2 u + det(D^2 u) - f| for the exact
// solution. Zero (to roundoff) for manufactured problems; equals the
// regularization residual eps * Lap^2 u0 for limit-problem solutions.
double verify_manufactured(const ProblemSpec& p, double eps, std::span<const Point> samples);

// Uniform interior sample grid, m points per direction.
std::vector<Point> interior_grid(const BoxDomain& domain, int m);

} // namespace vmma
