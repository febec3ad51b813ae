#include "vmma/hessian.hpp"

#include <algorithm>
#include <cmath>

namespace vmma {

SymMat SymMat::identity(int dim) {
  SymMat s = zero(dim);
  for (int i = 0; i < dim; ++i) s.m[i][i] = 1.0;
  return s;
}

SymMat SymMat::zero(int dim) {
  SymMat s;
  s.dim = dim;
  return s;
}

double hessian_det(const SymMat& h) {
  if (h.dim == 2) return h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  return h(0, 0) * (h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1)) -
         h(0, 1) * (h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0)) +
         h(0, 2) * (h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0));
}

SymMat cofactor(const SymMat& h) {
  SymMat c = SymMat::zero(h.dim);
  if (h.dim == 2) {
    c(0, 0) = h(1, 1);
    c(0, 1) = -h(1, 0);
    c(1, 0) = -h(0, 1);
    c(1, 1) = h(0, 0);
    return c;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
      const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
      // cyclic indexing absorbs the (-1)^{i+j} sign
      c(i, j) = h(i1, j1) * h(i2, j2) - h(i1, j2) * h(i2, j1);
    }
  }
  return c;
}

double contract(const SymMat& a, const SymMat& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim; ++i)
    for (int j = 0; j < a.dim; ++j) s += a(i, j) * b(i, j);
  return s;
}

double trace(const SymMat& h) {
  double s = 0.0;
  for (int i = 0; i < h.dim; ++i) s += h(i, i);
  return s;
}

double min_eigenvalue(const SymMat& h) {
  if (h.dim == 2) {
    const double mean = 0.5 * (h(0, 0) + h(1, 1));
    const double delta = 0.5 * (h(0, 0) - h(1, 1));
    return mean - std::hypot(delta, h(0, 1));
  }
  // cyclic Jacobi on a 3x3 copy
  std::array<std::array<double, 3>, 3> a = h.m;
  for (int sweep = 0; sweep < 32; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < 2; ++p)
      for (int q = p + 1; q < 3; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (a[p][q] == 0.0) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < 3; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 3; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  return std::min({a[0][0], a[1][1], a[2][2]});
}

} // namespace vmma
