#include "vmma/linear_solver.hpp"
#include "vmma/exec.hpp"

#include <algorithm>
#include <cmath>

namespace vmma {

namespace {

constexpr double kSingularTol = 1e-14;

// Unblocked panel factorization of columns [k0, k1) over rows [k0, n).
// Row swaps apply to the whole matrix; pivots recorded in piv.
void panel_factor(DenseMatrix& a, std::vector<int>& piv, int k0, int k1, double anorm) {
  const int n = a.rows;
  for (int k = k0; k < k1; ++k) {
    int p = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < kSingularTol * anorm) throw SingularMatrixError(k);
    piv[k] = p;
    if (p != k) std::swap_ranges(a.row(k), a.row(k) + n, a.row(p));
    const double inv = 1.0 / a(k, k);
    for (int i = k + 1; i < n; ++i) {
      const double lik = a(i, k) * inv;
      a(i, k) = lik;
      double* __restrict ri = a.row(i);
      const double* __restrict rk = a.row(k);
      for (int j = k + 1; j < k1; ++j) ri[j] -= lik * rk[j];
    }
  }
}

} // namespace

Factorization factor_reference(const DenseMatrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("factor: matrix must be square");
  Factorization f;
  f.storage = Factorization::Storage::dense;
  f.n = a.rows;
  f.lu = a;
  f.piv.assign(f.n, 0);
  const double anorm = std::max(a.inf_norm(), 1e-300);
  const double amax = std::max(a.max_abs(), 1e-300);
  panel_factor(f.lu, f.piv, 0, f.n, anorm);
  f.pivot_growth = f.lu.max_abs() / amax;
  return f;
}

Factorization factor(const DenseMatrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("factor: matrix must be square");
  Factorization f;
  f.storage = Factorization::Storage::dense;
  f.n = a.rows;
  f.lu = a;
  f.piv.assign(f.n, 0);
  const int n = f.n;
  const double anorm = std::max(a.inf_norm(), 1e-300);
  const double amax = std::max(a.max_abs(), 1e-300);
  DenseMatrix& m = f.lu;

  const int nb = 64;
  for (int k0 = 0; k0 < n; k0 += nb) {
    const int k1 = std::min(k0 + nb, n);
    panel_factor(m, f.piv, k0, k1, anorm);
    if (k1 == n) break;
    // U12 rows: L11^{-1} A12 (unit lower triangular solve inside the panel)
    for (int k = k0 + 1; k < k1; ++k) {
      double* __restrict rk = m.row(k);
      for (int mrow = k0; mrow < k; ++mrow) {
        const double lkm = m(k, mrow);
        const double* __restrict rm = m.row(mrow);
        for (int j = k1; j < n; ++j) rk[j] -= lkm * rm[j];
      }
    }
    // trailing update A22 -= L21 * U12, row-parallel (entries of each
    // row are owned by one thread; summation order is fixed)
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int i = k1; i < n; ++i) {
      double* __restrict ri = m.row(i);
      for (int mrow = k0; mrow < k1; ++mrow) {
        const double lim = ri[mrow];
        const double* __restrict rm = m.row(mrow);
        for (int j = k1; j < n; ++j) ri[j] -= lim * rm[j];
      }
    }
  }
  f.pivot_growth = m.max_abs() / amax;
  return f;
}

Factorization factor(const CsrMatrix& a) {
  Factorization f;
  f.storage = Factorization::Storage::banded;
  f.n = a.n;
  const int n = a.n;
  int kl = 0, ku = 0;
  for (int i = 0; i < n; ++i) {
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) {
      kl = std::max(kl, i - a.col[k]);
      ku = std::max(ku, a.col[k] - i);
    }
  }
  f.kl = kl;
  f.ku = ku;
  const int ldab = 2 * kl + ku + 1;
  f.ab.assign(static_cast<size_t>(ldab) * n, 0.0);
  auto at = [&](int i, int j) -> double& {
    return f.ab[static_cast<size_t>(j) * ldab + (kl + ku + i - j)];
  };
  for (int i = 0; i < n; ++i)
    for (int k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) at(i, a.col[k]) += a.val[k];

  const double anorm = std::max(a.inf_norm(), 1e-300);
  const double amax = std::max(a.max_abs(), 1e-300);
  f.bpiv.assign(n, 0);

  // gbtf2-style factorization with partial pivoting inside the band
  int ju = 0;
  for (int k = 0; k < n; ++k) {
    const int km = std::min(kl, n - 1 - k); // candidate pivot rows below k
    int p = 0;
    double best = std::abs(at(k, k));
    for (int i = 1; i <= km; ++i) {
      const double v = std::abs(at(k + i, k));
      if (v > best) {
        best = v;
        p = i;
      }
    }
    if (best < kSingularTol * anorm) throw SingularMatrixError(k);
    f.bpiv[k] = k + p;
    ju = std::max(ju, std::min(k + ku + kl, n - 1));
    if (p != 0) {
      for (int j = k; j <= ju; ++j) std::swap(at(k, j), at(k + p, j));
    }
    const double inv = 1.0 / at(k, k);
    for (int i = 1; i <= km; ++i) at(k + i, k) *= inv;
    for (int j = k + 1; j <= ju; ++j) {
      const double ukj = at(k, j);
      if (ukj == 0.0) continue;
      for (int i = 1; i <= km; ++i) at(k + i, j) -= at(k + i, k) * ukj;
    }
  }
  double umax = 0.0;
  for (double v : f.ab) umax = std::max(umax, std::abs(v));
  f.pivot_growth = umax / amax;
  return f;
}

std::vector<double> solve(const Factorization& f, std::span<const double> b) {
  if (static_cast<int>(b.size()) != f.n)
    throw std::invalid_argument("solve: dimension mismatch");
  std::vector<double> x(b.begin(), b.end());
  const int n = f.n;

  if (f.storage == Factorization::Storage::dense) {
    for (int k = 0; k < n; ++k)
      if (f.piv[k] != k) std::swap(x[k], x[f.piv[k]]);
    for (int k = 0; k < n; ++k) {
      const double xk = x[k];
      if (xk == 0.0) continue;
      for (int i = k + 1; i < n; ++i) x[i] -= f.lu(i, k) * xk;
    }
    for (int k = n - 1; k >= 0; --k) {
      double s = x[k];
      const double* rk = f.lu.row(k);
      for (int j = k + 1; j < n; ++j) s -= rk[j] * x[j];
      x[k] = s / rk[k];
    }
    return x;
  }

  const int kl = f.kl, ku = f.ku, ldab = 2 * kl + ku + 1;
  auto at = [&](int i, int j) -> double {
    return f.ab[static_cast<size_t>(j) * ldab + (kl + ku + i - j)];
  };
  for (int k = 0; k < n; ++k) {
    if (f.bpiv[k] != k) std::swap(x[k], x[f.bpiv[k]]);
    const int km = std::min(kl, n - 1 - k);
    const double xk = x[k];
    if (xk == 0.0) continue;
    for (int i = 1; i <= km; ++i) x[k + i] -= at(k + i, k) * xk;
  }
  for (int k = n - 1; k >= 0; --k) {
    double s = x[k];
    const int jmax = std::min(n - 1, k + ku + kl);
    for (int j = k + 1; j <= jmax; ++j) s -= at(k, j) * x[j];
    x[k] = s / at(k, k);
  }
  return x;
}

} // namespace vmma
