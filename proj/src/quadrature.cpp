#include "vmma/quadrature.hpp"
#include "vmma/exec.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vmma {

namespace exec {
namespace {
std::atomic<Mode> g_mode{Mode::parallel};
}
Mode mode() noexcept { return g_mode.load(std::memory_order_relaxed); }
void set_mode(Mode m) noexcept { g_mode.store(m, std::memory_order_relaxed); }
bool parallel() noexcept { return mode() == Mode::parallel; }
} // namespace exec

void legendre_all(int n, double x, double* val, double* d1, double* d2) {
  val[0] = 1.0;
  if (d1) d1[0] = 0.0;
  if (d2) d2[0] = 0.0;
  if (n == 0) return;
  val[1] = x;
  if (d1) d1[1] = 1.0;
  if (d2) d2[1] = 0.0;
  for (int k = 1; k < n; ++k) {
    const double a = 2.0 * k + 1.0;
    val[k + 1] = (a * x * val[k] - k * val[k - 1]) / (k + 1);
    if (d1) d1[k + 1] = d1[k - 1] + a * val[k];
    if (d2) d2[k + 1] = d2[k - 1] + a * d1[k];
  }
}

namespace {

// L_n and L_n' only, for Newton iterations on nodes.
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  double d0 = 0.0, d1v = 1.0;
  if (n == 0) { p = p0; dp = d0; return; }
  for (int k = 1; k < n; ++k) {
    const double a = 2.0 * k + 1.0;
    const double p2 = (a * x * p1 - k * p0) / (k + 1);
    const double d2 = d0 + a * p1;
    p0 = p1; p1 = p2;
    d0 = d1v; d1v = d2;
  }
  p = p1;
  dp = d1v;
}

} // namespace

QuadRule1D gauss_legendre_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre_rule: n must be >= 1");
  QuadRule1D rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-type initial guess for the i-th root counted from +1.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0.0, dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    legendre_pair(n, x, p, dp);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[n - 1 - i] = x;
    rule.nodes[i] = -x;
    rule.weights[n - 1 - i] = w;
    rule.weights[i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0; // kill the -0.0 from symmetry
  return rule;
}

QuadRule1D map_rule(const QuadRule1D& rule, double a, double b) {
  if (!(a < b)) throw std::invalid_argument("map_rule: requires a < b");
  QuadRule1D out;
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  out.nodes.reserve(rule.nodes.size());
  out.weights.reserve(rule.weights.size());
  for (size_t i = 0; i < rule.nodes.size(); ++i) {
    out.nodes.push_back(mid + half * rule.nodes[i]);
    out.weights.push_back(half * rule.weights[i]);
  }
  return out;
}

std::vector<double> lobatto_points(int n) {
  if (n < 1) throw std::invalid_argument("lobatto_points: n must be >= 1");
  std::vector<double> pts(n + 1);
  pts[0] = -1.0;
  pts[n] = 1.0;
  // interior points are the roots of L_n'
  std::vector<double> val(n + 1), d1(n + 1), d2(n + 1);
  for (int i = 1; i < n; ++i) {
    double x = std::cos(std::numbers::pi * i / n); // Chebyshev-Lobatto guess
    for (int it = 0; it < 100; ++it) {
      legendre_all(n, x, val.data(), d1.data(), d2.data());
      const double dx = d1[n] / d2[n];
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    pts[n - i] = x;
  }
  return pts;
}

namespace {

void hermite_shapes(double t, double* v, double* d1, double* d2) {
  // value/slope shapes at the two ends of [0,1]
  v[0] = 2 * t * t * t - 3 * t * t + 1; // value at 0
  v[1] = t * t * t - 2 * t * t + t;     // slope at 0
  v[2] = -2 * t * t * t + 3 * t * t;    // value at 1
  v[3] = t * t * t - t * t;             // slope at 1
  d1[0] = 6 * t * t - 6 * t;
  d1[1] = 3 * t * t - 4 * t + 1;
  d1[2] = -6 * t * t + 6 * t;
  d1[3] = 3 * t * t - 2 * t;
  d2[0] = 12 * t - 6;
  d2[1] = 6 * t - 4;
  d2[2] = -12 * t + 6;
  d2[3] = 6 * t - 2;
}

} // namespace

Basis1DTable tabulate_basis_1d(BasisKind kind, int max_index,
                               std::span<const double> points) {
  if (max_index < 0) throw std::invalid_argument("tabulate_basis_1d: bad max_index");
  const int np = static_cast<int>(points.size());
  const double tol = 1e-12;
  for (double x : points) {
    const bool ok = (kind == BasisKind::hermite_cubic)
                        ? (x >= -tol && x <= 1.0 + tol)
                        : (x >= -1.0 - tol && x <= 1.0 + tol);
    if (!ok) throw std::invalid_argument("tabulate_basis_1d: point outside reference interval");
  }

  Basis1DTable tab;
  tab.kind = kind;
  tab.max_index = max_index;
  tab.n_points = np;
  const int nb = max_index + 1;
  tab.values.assign(static_cast<size_t>(nb) * np, 0.0);
  tab.first_derivs.assign(static_cast<size_t>(nb) * np, 0.0);
  tab.second_derivs.assign(static_cast<size_t>(nb) * np, 0.0);

  if (kind == BasisKind::hermite_cubic) {
    if (max_index > 3)
      throw std::invalid_argument("tabulate_basis_1d: hermite_cubic has indices 0..3");
    double v[4], d1[4], d2[4];
    for (int p = 0; p < np; ++p) {
      hermite_shapes(points[p], v, d1, d2);
      for (int i = 0; i < nb; ++i) {
        tab.values[i * np + p] = v[i];
        tab.first_derivs[i * np + p] = d1[i];
        tab.second_derivs[i * np + p] = d2[i];
      }
    }
    return tab;
  }

  const int ntop = (kind == BasisKind::shen_interior) ? max_index + 2 : max_index;
  std::vector<double> val(ntop + 1), d1(ntop + 1), d2(ntop + 1);
  for (int p = 0; p < np; ++p) {
    legendre_all(ntop, points[p], val.data(), d1.data(), d2.data());
    for (int i = 0; i < nb; ++i) {
      if (kind == BasisKind::legendre) {
        tab.values[i * np + p] = val[i];
        tab.first_derivs[i * np + p] = d1[i];
        tab.second_derivs[i * np + p] = d2[i];
      } else {
        tab.values[i * np + p] = val[i] - val[i + 2];
        tab.first_derivs[i * np + p] = d1[i] - d1[i + 2];
        tab.second_derivs[i * np + p] = d2[i] - d2[i + 2];
      }
    }
  }
  return tab;
}

} // namespace vmma
