#include "vmma/problem.hpp"
#include "vmma/hessian.hpp"

#include <cmath>
#include <stdexcept>

namespace vmma {

namespace {

BoxDomain unit_square() {
  BoxDomain d;
  d.dim = 2;
  d.lower = {0, 0, 0};
  d.upper = {1, 1, 1};
  return d;
}

SymMat hess2(double xx, double xy, double yy) {
  SymMat h = SymMat::zero(2);
  h(0, 0) = xx;
  h(1, 1) = yy;
  h(0, 1) = h(1, 0) = xy;
  return h;
}

ProblemSpec test1a() {
  ProblemSpec p;
  p.id = "test1a";
  p.domain = unit_square();
  auto u = [](const Point& x) { return std::exp(0.5 * (x[0] * x[0] + x[1] * x[1])); };
  p.f = [u](const Point& x, double) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return (1.0 + r2) * std::exp(r2);
  };
  p.g = u;
  p.grad_g = [u](const Point& x) { return Point{x[0] * u(x), x[1] * u(x), 0.0}; };
  ExactSolution e;
  e.u = [u](const Point& x, double) { return u(x); };
  e.grad = [u](const Point& x, double) { return Point{x[0] * u(x), x[1] * u(x), 0.0}; };
  e.hess = [u](const Point& x, double) {
    const double v = u(x);
    return hess2((1 + x[0] * x[0]) * v, x[0] * x[1] * v, (1 + x[1] * x[1]) * v);
  };
  e.laplacian = [u](const Point& x, double) {
    return (2 + x[0] * x[0] + x[1] * x[1]) * u(x);
  };
  e.biharmonic = [u](const Point& x, double) {
    const double r2 = x[0] * x[0] + x[1] * x[1];
    return (8 + 8 * r2 + r2 * r2) * u(x);
  };
  p.exact = e;
  p.exact_kind = ExactKind::solves_limit_problem;
  return p;
}

ProblemSpec test1b(const std::string& id) {
  ProblemSpec p;
  p.id = id;
  p.domain = unit_square();
  p.f = [](const Point& x, double) { return 24.0 * x[0] * x[0]; };
  p.g = [](const Point& x) { return x[0] * x[0] * x[0] * x[0] + x[1] * x[1]; };
  p.grad_g = [](const Point& x) { return Point{4 * x[0] * x[0] * x[0], 2 * x[1], 0.0}; };
  ExactSolution e;
  e.u = [](const Point& x, double) { return x[0] * x[0] * x[0] * x[0] + x[1] * x[1]; };
  e.grad = [](const Point& x, double) { return Point{4 * x[0] * x[0] * x[0], 2 * x[1], 0.0}; };
  e.hess = [](const Point& x, double) { return hess2(12 * x[0] * x[0], 0.0, 2.0); };
  e.laplacian = [](const Point& x, double) { return 12 * x[0] * x[0] + 2.0; };
  e.biharmonic = [](const Point&, double) { return 24.0; };
  p.exact = e;
  p.exact_kind = ExactKind::solves_limit_problem;
  return p;
}

ProblemSpec test2a() {
  ProblemSpec p;
  p.id = "test2a";
  p.domain = unit_square();
  auto u = [](const Point& x) {
    return 20 * std::pow(x[0], 6) + std::pow(x[1], 6);
  };
  p.f = [](const Point& x, double eps) {
    return 18000 * std::pow(x[0], 4) * std::pow(x[1], 4) -
           eps * (7200 * x[0] * x[0] + 360 * x[1] * x[1]);
  };
  p.g = u;
  p.grad_g = [](const Point& x) {
    return Point{120 * std::pow(x[0], 5), 6 * std::pow(x[1], 5), 0.0};
  };
  p.q = [](const Point& x, double) { return 600 * std::pow(x[0], 4) + 30 * std::pow(x[1], 4); };
  ExactSolution e;
  e.u = [u](const Point& x, double) { return u(x); };
  e.grad = [](const Point& x, double) {
    return Point{120 * std::pow(x[0], 5), 6 * std::pow(x[1], 5), 0.0};
  };
  e.hess = [](const Point& x, double) {
    return hess2(600 * std::pow(x[0], 4), 0.0, 30 * std::pow(x[1], 4));
  };
  e.laplacian = [](const Point& x, double) {
    return 600 * std::pow(x[0], 4) + 30 * std::pow(x[1], 4);
  };
  e.biharmonic = [](const Point& x, double) {
    return 7200 * x[0] * x[0] + 360 * x[1] * x[1];
  };
  p.exact = e;
  p.exact_kind = ExactKind::solves_regularized_problem;
  return p;
}

ProblemSpec test2b() {
  ProblemSpec p;
  p.id = "test2b";
  p.domain = unit_square();
  auto u1 = [](double t) { return t * std::sin(t); };
  auto d1 = [](double t) { return std::sin(t) + t * std::cos(t); };
  auto d2 = [](double t) { return 2 * std::cos(t) - t * std::sin(t); };
  auto d4 = [](double t) { return -4 * std::cos(t) + t * std::sin(t); };
  p.f = [d2, d4](const Point& x, double eps) {
    return d2(x[0]) * d2(x[1]) - eps * (d4(x[0]) + d4(x[1]));
  };
  p.g = [u1](const Point& x) { return u1(x[0]) + u1(x[1]); };
  p.grad_g = [d1](const Point& x) { return Point{d1(x[0]), d1(x[1]), 0.0}; };
  p.q = [d2](const Point& x, double) { return d2(x[0]) + d2(x[1]); };
  ExactSolution e;
  e.u = [u1](const Point& x, double) { return u1(x[0]) + u1(x[1]); };
  e.grad = [d1](const Point& x, double) { return Point{d1(x[0]), d1(x[1]), 0.0}; };
  e.hess = [d2](const Point& x, double) { return hess2(d2(x[0]), 0.0, d2(x[1])); };
  e.laplacian = [d2](const Point& x, double) { return d2(x[0]) + d2(x[1]); };
  e.biharmonic = [d4](const Point& x, double) { return d4(x[0]) + d4(x[1]); };
  p.exact = e;
  p.exact_kind = ExactKind::solves_regularized_problem;
  return p;
}

ProblemSpec test3b() {
  ProblemSpec p;
  p.id = "test3b";
  p.domain = unit_square();
  auto u = [](const Point& x) { return 20 * std::pow(x[0], 6) + std::pow(x[1], 6); };
  p.f = [](const Point& x, double) {
    return 18000 * std::pow(x[0], 4) * std::pow(x[1], 4);
  };
  p.g = u;
  p.grad_g = [](const Point& x) {
    return Point{120 * std::pow(x[0], 5), 6 * std::pow(x[1], 5), 0.0};
  };
  ExactSolution e;
  e.u = [u](const Point& x, double) { return u(x); };
  e.grad = [](const Point& x, double) {
    return Point{120 * std::pow(x[0], 5), 6 * std::pow(x[1], 5), 0.0};
  };
  e.hess = [](const Point& x, double) {
    return hess2(600 * std::pow(x[0], 4), 0.0, 30 * std::pow(x[1], 4));
  };
  e.laplacian = [](const Point& x, double) {
    return 600 * std::pow(x[0], 4) + 30 * std::pow(x[1], 4);
  };
  e.biharmonic = [](const Point& x, double) {
    return 7200 * x[0] * x[0] + 360 * x[1] * x[1];
  };
  p.exact = e;
  p.exact_kind = ExactKind::solves_limit_problem;
  return p;
}

} // namespace

ProblemSpec builtin_problem(const std::string& id) {
  if (id == "test1a") return test1a();
  if (id == "test1b") return test1b("test1b");
  if (id == "test2a") return test2a();
  if (id == "test2b") return test2b();
  if (id == "test3a") return test1b("test3a"); // same data, q == eps
  if (id == "test3b") return test3b();
  throw std::invalid_argument("builtin_problem: unknown id '" + id + "'");
}

double verify_manufactured(const ProblemSpec& p, double eps, std::span<const Point> samples) {
  if (!p.exact || !p.exact->biharmonic || !p.exact->hess)
    throw std::logic_error("verify_manufactured: exact solution with derivatives required");
  double worst = 0.0;
  for (const Point& x : samples) {
    const double res = -eps * p.exact->biharmonic(x, eps) +
                       hessian_det(p.exact->hess(x, eps)) - p.f(x, eps);
    worst = std::max(worst, std::abs(res));
  }
  return worst;
}

std::vector<Point> interior_grid(const BoxDomain& domain, int m) {
  if (m < 1) throw std::invalid_argument("interior_grid: m must be >= 1");
  std::vector<Point> pts;
  if (domain.dim == 2) {
    pts.reserve(static_cast<size_t>(m) * m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        pts.push_back({domain.lower[0] + (i + 1) * domain.length(0) / (m + 1),
                       domain.lower[1] + (j + 1) * domain.length(1) / (m + 1), 0.0});
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          pts.push_back({domain.lower[0] + (i + 1) * domain.length(0) / (m + 1),
                         domain.lower[1] + (j + 1) * domain.length(1) / (m + 1),
                         domain.lower[2] + (k + 1) * domain.length(2) / (m + 1)});
  }
  return pts;
}

} // namespace vmma
