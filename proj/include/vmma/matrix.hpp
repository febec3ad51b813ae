#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

namespace vmma {

struct DenseMatrix {
  int rows = 0, cols = 0;
  std::vector<double> a; // row-major

  DenseMatrix() = default;
  DenseMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
  double* row(int i) { return a.data() + static_cast<size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<size_t>(i) * cols; }

  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }
  double inf_norm() const { // max absolute row sum
    double m = 0.0;
    for (int i = 0; i < rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < cols; ++j) s += std::abs((*this)(i, j));
      m = std::max(m, s);
    }
    return m;
  }
};

// Compressed sparse row, square, with sorted column indices per row.
struct CsrMatrix {
  int n = 0;
  std::vector<int> row_ptr; // n+1
  std::vector<int> col;
  std::vector<double> val;

  double max_abs() const {
    double m = 0.0;
    for (double v : val) m = std::max(m, std::abs(v));
    return m;
  }
  double inf_norm() const {
    double m = 0.0;
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) s += std::abs(val[k]);
      m = std::max(m, s);
    }
    return m;
  }
  // position of (i,j) in val, or -1 when outside the pattern
  int find(int i, int j) const {
    int lo = row_ptr[i], hi = row_ptr[i + 1];
    while (lo < hi) {
      const int mid = (lo + hi) / 2;
      if (col[mid] < j) lo = mid + 1;
      else hi = mid;
    }
    return (lo < row_ptr[i + 1] && col[lo] == j) ? lo : -1;
  }
  DenseMatrix to_dense() const {
    DenseMatrix d(n, n);
    for (int i = 0; i < n; ++i)
      for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k) d(i, col[k]) += val[k];
    return d;
  }
};

inline void matvec(const DenseMatrix& m, const std::vector<double>& x, std::vector<double>& y) {
  y.assign(m.rows, 0.0);
  for (int i = 0; i < m.rows; ++i) {
    double s = 0.0;
    const double* r = m.row(i);
    for (int j = 0; j < m.cols; ++j) s += r[j] * x[j];
    y[i] = s;
  }
}

inline void matvec(const CsrMatrix& m, const std::vector<double>& x, std::vector<double>& y) {
  y.assign(m.n, 0.0);
  for (int i = 0; i < m.n; ++i) {
    double s = 0.0;
    for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k) s += m.val[k] * x[m.col[k]];
    y[i] = s;
  }
}

} // namespace vmma
