#pragma once

#include <array>

// Pointwise algebra on small symmetric matrices (discrete Hessians).

namespace vmma {

struct SymMat {
  int dim = 2;
  // 3x3 storage regardless of dim; unused entries stay zero
  std::array<std::array<double, 3>, 3> m{};

  double& operator()(int i, int j) { return m[i][j]; }
  double operator()(int i, int j) const { return m[i][j]; }

  static SymMat identity(int dim);
  static SymMat zero(int dim);
};

double hessian_det(const SymMat& h);

// Cofactor matrix: satisfies H * cof(H)^T = det(H) * I. Symmetric input
// gives a symmetric result.
SymMat cofactor(const SymMat& h);

// Frobenius-style contraction a : b = sum_ij a_ij b_ij.
double contract(const SymMat& a, const SymMat& b);

double trace(const SymMat& h);

// Smallest eigenvalue of a symmetric matrix: closed form for dim 2,
// cyclic Jacobi sweeps for dim 3.
double min_eigenvalue(const SymMat& h);

} // namespace vmma
