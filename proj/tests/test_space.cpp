#include "vmma/space.hpp"

#include "support.hpp"
#include "vmma/analysis.hpp"
#include "vmma/solution_io.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <sstream>

using namespace vmma;

namespace {

BoxDomain unit_square() {
  BoxDomain d;
  d.dim = 2;
  return d;
}

BoxDomain unit_cube() {
  BoxDomain d;
  d.dim = 3;
  return d;
}

// boundary sample of a 2-D box, roughly uniform, n points
std::vector<Point> boundary_sample(const BoxDomain& dom, int n) {
  std::vector<Point> pts;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double s = 4.0 * t;
    Point p{0, 0, 0};
    if (s < 1) {
      p = {dom.lower[0] + s * dom.length(0), dom.lower[1], 0};
    } else if (s < 2) {
      p = {dom.upper[0], dom.lower[1] + (s - 1) * dom.length(1), 0};
    } else if (s < 3) {
      p = {dom.upper[0] - (s - 2) * dom.length(0), dom.upper[1], 0};
    } else {
      p = {dom.lower[0], dom.upper[1] - (s - 3) * dom.length(1), 0};
    }
    pts.push_back(p);
  }
  return pts;
}

const ScalarFn poly_g = [](const Point& x) {
  return std::pow(x[0], 4) + x[1] * x[1];
};
const VectorFn poly_grad = [](const Point& x) {
  return Point{4 * std::pow(x[0], 3), 2 * x[1], 0.0};
};
const MatrixFn poly_hess = [](const Point& x) {
  SymMat h = SymMat::zero(2);
  h(0, 0) = 12 * x[0] * x[0];
  h(1, 1) = 2.0;
  return h;
};

} // namespace

TEST_CASE("spectral free-DOF counts") {
  CHECK(build_space(SpaceKind::spectral, unit_square(), 2).n_free() == 1);
  CHECK(build_space(SpaceKind::spectral, unit_square(), 4).n_free() == 9);
  CHECK(build_space(SpaceKind::spectral, unit_cube(), 4).n_free() == 27);
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 6);
  CHECK(s.dof_count == 7 * 7); // free + boundary cardinals span Q_N
  CHECK(static_cast<int>(s.constrained_dofs.size()) == 4 * 6);
}

TEST_CASE("hermite 2x2 mesh DOF partition") {
  const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), 2, 2);
  CHECK(s.dof_count == 36);
  CHECK(s.n_free() == 16);
  CHECK(static_cast<int>(s.constrained_dofs.size()) == 20);
  // each DOF is in exactly one of the two sets
  std::vector<int> seen(s.dof_count, 0);
  for (int d : s.free_dofs) seen[d]++;
  for (int d : s.constrained_dofs) seen[d]++;
  for (int c : seen) CHECK(c == 1);
}

TEST_CASE("build_space rejects unsupported combinations") {
  CHECK_THROWS_AS(build_space(SpaceKind::spectral, unit_square(), 1), std::invalid_argument);
  CHECK_THROWS_AS(build_space(SpaceKind::hermite_fem, unit_cube(), 4, 4),
                  std::invalid_argument);
  CHECK_THROWS_AS(build_space(SpaceKind::hermite_fem, unit_square(), 0, 4),
                  std::invalid_argument);
  BoxDomain bad = unit_square();
  bad.upper[0] = bad.lower[0];
  CHECK_THROWS_AS(build_space(SpaceKind::spectral, bad, 4), std::invalid_argument);
}

TEST_CASE("quadrature weights sum to the domain volume") {
  for (const FunctionSpace& s :
       {build_space(SpaceKind::spectral, unit_square(), 5),
        build_space(SpaceKind::spectral, unit_cube(), 3),
        build_space(SpaceKind::hermite_fem, unit_square(), 3, 2)}) {
    const EvaluationTable t = tabulate(s, default_quad_order(s));
    double vol = 0.0;
    for (int q = 0; q < t.n_points(); ++q) vol += t.weight(q);
    CHECK(vol == doctest::Approx(s.domain.volume()).epsilon(1e-13));
  }
  CHECK_THROWS_AS(tabulate(build_space(SpaceKind::spectral, unit_square(), 4), 1),
                  std::invalid_argument);
}

TEST_CASE("table invariants: hessian symmetric, laplacian = trace") {
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 5);
  const EvaluationTable t = tabulate(s, 8);
  for (int dof : {0, 3, s.dof_count - 1}) {
    for (int q = 0; q < t.n_points(); q += 7) {
      const SymMat h = t.hessian(dof, q);
      CHECK(h(0, 1) == h(1, 0));
      CHECK(t.laplacian(dof, q) == doctest::Approx(h(0, 0) + h(1, 1)).epsilon(1e-14));
    }
  }
}

TEST_CASE("interpolated quadratic reproduces a unit Hessian at quadrature points") {
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 4);
  const DofVector u = interpolate(
      s, [](const Point& x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
  const EvaluationTable t = tabulate(s, default_quad_order(s));
  std::vector<Point> pts;
  for (int q = 0; q < t.n_points(); ++q) pts.push_back(t.point(q));
  for (const FieldSample& f : evaluate_field(s, u, pts)) {
    CHECK(std::abs(f.hessian(0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(f.hessian(1, 1) - 1.0) < 1e-12);
    CHECK(std::abs(f.hessian(0, 1)) < 1e-12);
  }
}

TEST_CASE("hermite value shapes sum to one") {
  const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), 3, 3);
  DofVector ones = zero_dof_vector(s);
  for (int n = 0; n < (s.nx + 1) * (s.ny + 1); ++n) ones.coeffs[4 * n] = 1.0;
  const EvaluationTable t = tabulate(s, 8);
  std::vector<Point> pts;
  for (int q = 0; q < t.n_points(); ++q) pts.push_back(t.point(q));
  for (const FieldSample& f : evaluate_field(s, ones, pts))
    CHECK(f.value == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("evaluate_field on known polynomials") {
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 5);
  SUBCASE("zero coefficients evaluate to zero") {
    const DofVector z = zero_dof_vector(s);
    const FieldSample f = evaluate_field_at(s, z, {0.3, 0.7, 0});
    CHECK(f.value == 0.0);
    CHECK(f.gradient[0] == 0.0);
    CHECK(f.hessian(1, 1) == 0.0);
  }
  SUBCASE("x^4 + y^2 at (1,1)") {
    const DofVector u = interpolate(s, poly_g);
    const FieldSample f = evaluate_field_at(s, u, {1.0, 1.0, 0});
    CHECK(f.value == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(f.hessian(0, 0) == doctest::Approx(12.0).epsilon(1e-11));
    CHECK(f.hessian(1, 1) == doctest::Approx(2.0).epsilon(1e-11));
    CHECK(std::abs(f.hessian(0, 1)) < 1e-11);
  }
  SUBCASE("points outside the domain are rejected") {
    const DofVector z = zero_dof_vector(s);
    CHECK_THROWS_AS(evaluate_field_at(s, z, {1.5, 0.5, 0}), std::invalid_argument);
  }
}

TEST_CASE("free basis functions vanish on the boundary") {
  const std::vector<Point> sample = boundary_sample(unit_square(), 101);
  for (const FunctionSpace& s : {build_space(SpaceKind::spectral, unit_square(), 6),
                                 build_space(SpaceKind::hermite_fem, unit_square(), 3, 3)}) {
    auto gen = testing::rng(5);
    DofVector v = zero_dof_vector(s);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (int d : s.free_dofs) v.coeffs[d] = dist(gen);
    for (const FieldSample& f : evaluate_field(s, v, sample))
      CHECK(std::abs(f.value) < 1e-12);
  }
}

TEST_CASE("boundary lift") {
  SUBCASE("zero data gives the zero vector") {
    const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 5);
    const DofVector v = boundary_lift(s, [](const Point&) { return 0.0; });
    for (double c : v.coeffs) CHECK(c == 0.0);
  }
  SUBCASE("spectral lift reproduces a degree-4 trace exactly") {
    const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 4);
    const DofVector v = boundary_lift(s, poly_g);
    for (const Point& p : boundary_sample(unit_square(), 101)) {
      const FieldSample f = evaluate_field_at(s, v, p);
      CHECK(std::abs(f.value - poly_g(p)) < 1e-12);
    }
  }
  SUBCASE("fem lift converges at fourth order on the boundary") {
    double prev = 0.0;
    for (int n : {2, 4, 8, 16}) {
      const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), n, n);
      const DofVector v = boundary_lift(s, poly_g, poly_grad);
      double worst = 0.0;
      for (const Point& p : boundary_sample(unit_square(), 101)) {
        const FieldSample f = evaluate_field_at(s, v, p);
        worst = std::max(worst, std::abs(f.value - poly_g(p)));
      }
      if (prev > 0.0) CHECK(worst < prev / 8.0); // at least ~h^3; expect h^4
      prev = worst;
    }
  }
  SUBCASE("fem lift requires tangential data") {
    const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), 2, 2);
    CHECK_THROWS_AS(boundary_lift(s, poly_g), std::invalid_argument);
  }
}

TEST_CASE("3-D spectral lift reproduces a polynomial trace") {
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_cube(), 4);
  const ScalarFn g = [](const Point& x) {
    return std::pow(x[0], 4) + x[1] * x[1] + x[1] * x[2];
  };
  const DofVector v = boundary_lift(s, g);
  auto gen = testing::rng(11);
  std::uniform_real_distribution<double> dist(0, 1);
  for (int trial = 0; trial < 60; ++trial) {
    Point p{dist(gen), dist(gen), dist(gen)};
    p[trial % 3] = (trial % 2) ? 1.0 : 0.0; // push to a random face
    const FieldSample f = evaluate_field_at(s, v, p);
    CHECK(std::abs(f.value - g(p)) < 1e-11);
  }
}

TEST_CASE("fem fields are C1 across element interfaces") {
  const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), 3, 3);
  auto gen = testing::rng(7);
  const DofVector v = testing::random_state(gen, s);
  for (int k = 1; k < 3; ++k) {
    const double xi = k / 3.0;
    for (int i = 0; i < 10; ++i) {
      const double y = (i + 0.5) / 10.0;
      const Point left{std::nextafter(xi, 0.0), y, 0};
      const Point right{std::nextafter(xi, 1.0), y, 0};
      const FieldSample fl = evaluate_field_at(s, v, left);
      const FieldSample fr = evaluate_field_at(s, v, right);
      CHECK(std::abs(fl.value - fr.value) < 1e-10);
      CHECK(std::abs(fl.gradient[0] - fr.gradient[0]) < 1e-10);
      CHECK(std::abs(fl.gradient[1] - fr.gradient[1]) < 1e-10);
    }
  }
}

TEST_CASE("approximation property for u = x sin x + y sin y") {
  const ScalarFn u = [](const Point& x) {
    return x[0] * std::sin(x[0]) + x[1] * std::sin(x[1]);
  };
  const VectorFn gu = [](const Point& x) {
    return Point{std::sin(x[0]) + x[0] * std::cos(x[0]),
                 std::sin(x[1]) + x[1] * std::cos(x[1]), 0};
  };
  const MatrixFn hu = [](const Point& x) {
    SymMat h = SymMat::zero(2);
    h(0, 0) = 2 * std::cos(x[0]) - x[0] * std::sin(x[0]);
    h(1, 1) = 2 * std::cos(x[1]) - x[1] * std::sin(x[1]);
    return h;
  };
  const ExactTriple exact{u, gu, hu};

  SUBCASE("fem converges with rate >= 2 in H2") {
    std::vector<std::pair<double, double>> data;
    for (int n : {2, 4, 8, 16}) {
      const FunctionSpace s = build_space(SpaceKind::hermite_fem, unit_square(), n, n);
      const Norms e = error_norms(s, interpolate(s, u, gu, hu), &exact);
      data.emplace_back(1.0 / n, e.h2);
    }
    const RateFit fit = rate_fit(data, RateFit::Mode::free);
    CHECK(fit.alpha >= 2.0);
  }
  SUBCASE("spectral converges super-algebraically") {
    double prev = 1e9;
    for (int n : {4, 8, 12}) {
      const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), n);
      const Norms e = error_norms(s, interpolate(s, u), &exact);
      CHECK(e.h2 < prev * 1e-2);
      prev = e.h2;
    }
  }
}

TEST_CASE("spectral_pad embeds a polynomial field exactly") {
  const FunctionSpace s5 = build_space(SpaceKind::spectral, unit_square(), 5);
  const FunctionSpace s7 = build_space(SpaceKind::spectral, unit_square(), 7);
  const ScalarFn u = [](const Point& x) { return std::pow(x[0], 3) * x[1] * x[1] + x[0]; };
  const DofVector u5 = interpolate(s5, u);
  DofVector u7 = spectral_pad(s5, s7, u5);
  const DofVector lift7 = boundary_lift(s7, u);
  for (int d : s7.constrained_dofs) u7.coeffs[d] = lift7.coeffs[d];
  auto gen = testing::rng(3);
  std::uniform_real_distribution<double> dist(0, 1);
  for (int t = 0; t < 25; ++t) {
    const Point p{dist(gen), dist(gen), 0};
    CHECK(evaluate_field_at(s7, u7, p).value ==
          doctest::Approx(evaluate_field_at(s5, u5, p).value).epsilon(1e-11));
  }
}

TEST_CASE("solution dump round-trips bit-exactly") {
  const FunctionSpace s = build_space(SpaceKind::spectral, unit_square(), 4);
  auto gen = testing::rng(9);
  const DofVector v = testing::random_state(gen, s);
  std::stringstream ss;
  dump_solution(ss, s, 0.015625, v);
  const LoadedSolution back = load_solution(ss);
  CHECK(back.kind == SpaceKind::spectral);
  CHECK(back.order == 4);
  CHECK(back.epsilon == 0.015625);
  REQUIRE(back.coeffs.size() == v.coeffs.size());
  for (size_t i = 0; i < v.coeffs.size(); ++i) CHECK(back.coeffs[i] == v.coeffs[i]);
}
