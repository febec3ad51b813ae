#pragma once

#include "vmma/matrix.hpp"
#include "vmma/problem.hpp"
#include "vmma/space.hpp"

#include <array>
#include <functional>
#include <string>
#include <vector>

// Global assembly for the regularized Monge-Ampere operator:
//
//   residual  R(u)[v] = -eps (Lap u, Lap v) + (det D^2 u, v) - (f, v)
//                       + eps <q, dv/dnu>
//   Jacobian  J[w,v]  = -eps (Lap w, Lap v) + (Phi(u) : D^2 w, v)
//   B form    B[v,w]  =  eps (Lap v, Lap w) + (Phi(u) Dv, Dw)
//
// with Phi(u) the cofactor matrix of the discrete Hessian. J and B are
// assembled over the free DOFs; at exactly-integrating quadrature order
// they satisfy J + B = 0 entrywise (row divergence-free property of the
// cofactor combined with integration by parts against v in V_0).
//
// Spectral matrices are dense and assembled by sum factorization over
// the tensor quadrature grid; FEM matrices are CSR from element loops.
// Parallel paths accumulate per-element/per-line buffers and reduce in
// a fixed order, so results do not depend on the thread count.

namespace vmma {

struct AssembledOperator {
  bool is_dense = true;
  DenseMatrix dense;
  CsrMatrix csr;
  std::vector<double> rhs;
  double epsilon = 0.0;
  std::string space_id;

  int n() const { return is_dense ? dense.rows : csr.n; }
  double max_abs() const { return is_dense ? dense.max_abs() : csr.max_abs(); }
};

// Discrete field and its derivatives at all volume quadrature points.
struct FieldOnQuad {
  int nq = 0;
  int dim = 2;
  std::vector<double> value;
  std::array<std::vector<double>, 3> grad;
  // hess components: xx, yy, zz, xy, xz, yz (zz/xz/yz empty in 2-D)
  std::array<std::vector<double>, 6> hess;

  SymMat hess_at(int q) const;
  double lap_at(int q) const;
};

FieldOnQuad field_on_quad(const FunctionSpace& space, const EvaluationTable& table,
                          const DofVector& u);

// Linear functional over the free test functions:
//   L[v] = (c_val, v) + sum_d (c_grad[d], dv/dx_d) + (c_lap, Lap v)
//          + sum_faces <c_face, dv/dnu>
// Volume coefficients are integrand factors sampled at the quadrature
// points (weights applied internally); empty vectors are skipped.
struct LinearFormSpec {
  std::vector<double> c_val;
  std::array<std::vector<double>, 3> c_grad;
  std::vector<double> c_lap;
  std::vector<std::vector<double>> c_face;
};

std::vector<double> assemble_linear_form(const FunctionSpace& space,
                                         const EvaluationTable& table,
                                         const LinearFormSpec& spec);

std::vector<double> assemble_residual(const FunctionSpace& space, const EvaluationTable& table,
                                      const ProblemSpec& p, double eps, const DofVector& u);

AssembledOperator assemble_jacobian(const FunctionSpace& space, const EvaluationTable& table,
                                    double eps, const DofVector& u);

AssembledOperator assemble_B_form(const FunctionSpace& space, const EvaluationTable& table,
                                  double eps, const DofVector& u);

// B with Phi frozen at the identity (the convex-seed linearization).
AssembledOperator assemble_B_form_identity(const FunctionSpace& space,
                                           const EvaluationTable& table, double eps);

// entries eps * surface integral of q * dv/dnu per free v
std::vector<double> boundary_load(const FunctionSpace& space, const EvaluationTable& table,
                                  double eps, const std::function<double(const Point&)>& q);

// (f, v) per free v
std::vector<double> assemble_load(const FunctionSpace& space, const EvaluationTable& table,
                                  const std::function<double(const Point&)>& f);

namespace kernels {

// M[(i,j),(k,l)] += sum_{p,q} c[p*nqy+q] * xt[i][p] yt[j][q] * xu[k][p] yu[l][q]
// Production path: sum-factorized, OpenMP over output blocks.
void term_matrix_2d(int nfx, int nfy, int nqx, int nqy, const double* c, const double* xt,
                    const double* yt, const double* xu, const double* yu, DenseMatrix& m);

// Naive O(nq * nfree^2) reference used by tests and the benchmark.
void term_matrix_2d_reference(int nfx, int nfy, int nqx, int nqy, const double* c,
                              const double* xt, const double* yt, const double* xu,
                              const double* yu, DenseMatrix& m);

} // namespace kernels

} // namespace vmma
