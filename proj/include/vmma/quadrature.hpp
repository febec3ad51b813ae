#pragma once

#include <span>
#include <vector>

// One-dimensional building blocks: Gauss-Legendre quadrature, Legendre
// polynomial tables, the interior (endpoint-vanishing) combinations
// eta_k = L_k - L_{k+2}, and cubic Hermite shape functions.

namespace vmma {

struct QuadRule1D {
  std::vector<double> nodes;   // strictly increasing
  std::vector<double> weights; // positive, sum = interval length

  int size() const { return static_cast<int>(nodes.size()); }
};

// n-point Gauss-Legendre rule on [-1,1]. Nodes are Newton-refined from
// Chebyshev initial guesses to 1e-15; exact for polynomials of degree
// 2n-1. Throws std::invalid_argument for n < 1.
QuadRule1D gauss_legendre_rule(int n);

// Affine image of a rule on [a,b]; weights pick up the factor (b-a)/2.
QuadRule1D map_rule(const QuadRule1D& rule, double a, double b);

// Gauss-Lobatto points (endpoints plus roots of L_N') on [-1,1],
// ascending. Used as interpolation sites only, never as a quadrature.
std::vector<double> lobatto_points(int n);

// Values and first/second derivatives of L_0..L_n at x, from the
// three-term recurrences. Arrays must hold n+1 entries.
void legendre_all(int n, double x, double* val, double* d1, double* d2);

enum class BasisKind { legendre, shen_interior, hermite_cubic };

struct Basis1DTable {
  BasisKind kind = BasisKind::legendre;
  int max_index = 0;
  int n_points = 0;
  // row-major [basis index][point]
  std::vector<double> values, first_derivs, second_derivs;

  double value(int i, int p) const { return values[i * n_points + p]; }
  double d1(int i, int p) const { return first_derivs[i * n_points + p]; }
  double d2(int i, int p) const { return second_derivs[i * n_points + p]; }
};

// Tabulates basis functions 0..max_index at the given points of the
// reference interval ([-1,1] for legendre/shen_interior, [0,1] for
// hermite_cubic). Derivatives come from the exact recurrences or closed
// forms. Points outside the reference interval are rejected.
Basis1DTable tabulate_basis_1d(BasisKind kind, int max_index,
                               std::span<const double> points);

} // namespace vmma
