#pragma once

#include "vmma/matrix.hpp"

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

// Direct factor-and-solve. Dense systems use a blocked LU with partial
// pivoting whose trailing updates run under OpenMP; sparse systems are
// detected as banded and factored LAPACK-style (gbtrf layout) with
// partial pivoting. Factorizations are immutable; concurrent solves on
// one factorization are safe.

namespace vmma {

class SingularMatrixError : public std::runtime_error {
public:
  int pivot_index;
  explicit SingularMatrixError(int index)
      : std::runtime_error("matrix numerically singular at pivot " + std::to_string(index)),
        pivot_index(index) {}
};

struct Factorization {
  enum class Storage { dense, banded } storage = Storage::dense;
  int n = 0;
  double pivot_growth = 0.0; // max |U| / max |A|

  // dense
  DenseMatrix lu;
  std::vector<int> piv;

  // banded, LAPACK gbtrf layout: ab[(2kl+ku+1) x n], entry (i,j) at
  // ab[kl+ku+i-j + j*ldab]
  int kl = 0, ku = 0;
  std::vector<double> ab;
  std::vector<int> bpiv;
};

Factorization factor(const DenseMatrix& a);
Factorization factor(const CsrMatrix& a);

std::vector<double> solve(const Factorization& f, std::span<const double> b);

// Unblocked single-threaded LU kept as the reference implementation for
// tests and benchmarks.
Factorization factor_reference(const DenseMatrix& a);

} // namespace vmma
