#include "vmma/assembly.hpp"
#include "vmma/exec.hpp"
#include "vmma/hessian.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

namespace vmma {

SymMat FieldOnQuad::hess_at(int q) const {
  SymMat h = SymMat::zero(dim);
  h(0, 0) = hess[0][q];
  h(1, 1) = hess[1][q];
  if (dim == 2) {
    h(0, 1) = h(1, 0) = hess[3][q];
  } else {
    h(2, 2) = hess[2][q];
    h(0, 1) = h(1, 0) = hess[3][q];
    h(0, 2) = h(2, 0) = hess[4][q];
    h(1, 2) = h(2, 1) = hess[5][q];
  }
  return h;
}

double FieldOnQuad::lap_at(int q) const {
  double s = hess[0][q] + hess[1][q];
  if (dim == 3) s += hess[2][q];
  return s;
}

namespace {

// ---------------------------------------------------------------------
// spectral helpers
// ---------------------------------------------------------------------

inline double sp_tab(const SpectralTable& sp, int fun, int p, int order, int d) {
  const int nq = sp.nq1;
  switch (order) {
    case 0: return sp.fval[fun * nq + p];
    case 1: return sp.fd1[fun * nq + p] * sp.scale[d];
    default: return sp.fd2[fun * nq + p] * sp.scale[d] * sp.scale[d];
  }
}

// interior (Shen) factor tables per direction and derivative order,
// chain-scaled; laid out [i][p] plus a transposed copy [p][i]
struct ShenTables {
  int nf1 = 0, nq1 = 0, dim = 2;
  std::array<std::array<std::vector<double>, 3>, 3> t;  // [d][order]
  std::array<std::array<std::vector<double>, 3>, 3> tT; // transposed

  const double* tab(int d, int o) const { return t[d][o].data(); }
  const double* tabT(int d, int o) const { return tT[d][o].data(); }
};

ShenTables build_shen_tables(const SpectralTable& sp) {
  ShenTables st;
  st.nf1 = sp.n - 1;
  st.nq1 = sp.nq1;
  st.dim = sp.dim;
  for (int d = 0; d < sp.dim; ++d) {
    for (int o = 0; o < 3; ++o) {
      st.t[d][o].assign(static_cast<size_t>(st.nf1) * st.nq1, 0.0);
      st.tT[d][o].assign(static_cast<size_t>(st.nf1) * st.nq1, 0.0);
      for (int i = 0; i < st.nf1; ++i) {
        for (int p = 0; p < st.nq1; ++p) {
          const double v = sp_tab(sp, sp.basis->shen(i), p, o, d);
          st.t[d][o][static_cast<size_t>(i) * st.nq1 + p] = v;
          st.tT[d][o][static_cast<size_t>(p) * st.nf1 + i] = v;
        }
      }
    }
  }
  return st;
}

std::vector<double> weight_grid(const SpectralTable& sp) {
  const int nq1 = sp.nq1;
  std::vector<double> w;
  if (sp.dim == 2) {
    w.resize(static_cast<size_t>(nq1) * nq1);
    for (int p = 0; p < nq1; ++p)
      for (int q = 0; q < nq1; ++q)
        w[static_cast<size_t>(p) * nq1 + q] = sp.weights_d[0][p] * sp.weights_d[1][q];
  } else {
    w.resize(static_cast<size_t>(nq1) * nq1 * nq1);
    for (int p = 0; p < nq1; ++p)
      for (int q = 0; q < nq1; ++q)
        for (int r = 0; r < nq1; ++r)
          w[(static_cast<size_t>(p) * nq1 + q) * nq1 + r] =
              sp.weights_d[0][p] * sp.weights_d[1][q] * sp.weights_d[2][r];
  }
  return w;
}

// 1-D weighted product matrix over the interior factors:
// out[i][k] = sum_p w_d[p] f_i^{(ot)}(p) f_k^{(ou)}(p)
DenseMatrix dirmat(const SpectralTable& sp, const ShenTables& st, int d, int ot, int ou) {
  const int nf1 = st.nf1, nq1 = st.nq1;
  DenseMatrix m(nf1, nf1);
  const double* ft = st.tab(d, ot);
  const double* fu = st.tab(d, ou);
  for (int i = 0; i < nf1; ++i)
    for (int k = 0; k < nf1; ++k) {
      double s = 0.0;
      for (int p = 0; p < nq1; ++p)
        s += sp.weights_d[d][p] * ft[i * nq1 + p] * fu[k * nq1 + p];
      m(i, k) = s;
    }
  return m;
}

void kron2_add(DenseMatrix& m, double coef, const DenseMatrix& ax, const DenseMatrix& ay) {
  const int nx = ax.rows, ny = ay.rows;
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nx; ++k) {
      const double cik = coef * ax(i, k);
      if (cik == 0.0) continue;
      for (int j = 0; j < ny; ++j) {
        double* row = m.row(i * ny + j) + static_cast<size_t>(k) * ny;
        const double* ayr = ay.row(j);
        for (int l = 0; l < ny; ++l) row[l] += cik * ayr[l];
      }
    }
  }
}

void kron3_add(DenseMatrix& m, double coef, const DenseMatrix& ax, const DenseMatrix& ay,
               const DenseMatrix& az) {
  const int nx = ax.rows, ny = ay.rows, nz = az.rows;
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int i = 0; i < nx; ++i) {
    for (int k = 0; k < nx; ++k) {
      const double cik = coef * ax(i, k);
      if (cik == 0.0) continue;
      for (int j = 0; j < ny; ++j) {
        for (int l = 0; l < ny; ++l) {
          const double cjl = cik * ay(j, l);
          for (int a = 0; a < nz; ++a) {
            double* row = m.row((i * ny + j) * nz + a) + (static_cast<size_t>(k) * ny + l) * nz;
            const double* azr = az.row(a);
            for (int b = 0; b < nz; ++b) row[b] += cjl * azr[b];
          }
        }
      }
    }
  }
}

// (Lap v, Lap w) over the free DOFs via Kronecker products of 1-D
// integrals (constant coefficient, so no grid pass is needed)
void add_biharmonic(DenseMatrix& m, double coef, const SpectralTable& sp,
                    const ShenTables& st) {
  const int dim = sp.dim;
  for (int dt = 0; dt < dim; ++dt) {
    for (int du = 0; du < dim; ++du) {
      DenseMatrix f[3];
      for (int d = 0; d < dim; ++d)
        f[d] = dirmat(sp, st, d, d == dt ? 2 : 0, d == du ? 2 : 0);
      if (dim == 2) kron2_add(m, coef, f[0], f[1]);
      else kron3_add(m, coef, f[0], f[1], f[2]);
    }
  }
}

// gradient form (Dv, Dw) over the free DOFs (identity coefficient)
void add_gradient_identity(DenseMatrix& m, double coef, const SpectralTable& sp,
                           const ShenTables& st) {
  const int dim = sp.dim;
  for (int d = 0; d < dim; ++d) {
    DenseMatrix f[3];
    for (int e = 0; e < dim; ++e) f[e] = dirmat(sp, st, e, e == d ? 1 : 0, e == d ? 1 : 0);
    if (dim == 2) kron2_add(m, coef, f[0], f[1]);
    else kron3_add(m, coef, f[0], f[1], f[2]);
  }
}

// accumulate one boundary-DOF separable term over the 2-D grid
void add_term_grid_2d(const SpectralTable& sp, const SepTerm& t, double c, int ox, int oy,
                      std::vector<double>& out) {
  const int nq1 = sp.nq1;
  for (int p = 0; p < nq1; ++p) {
    const double fx = c * t.c * sp_tab(sp, t.f[0], p, ox, 0);
    if (fx == 0.0) continue;
    double* row = out.data() + static_cast<size_t>(p) * nq1;
    for (int q = 0; q < nq1; ++q) row[q] += fx * sp_tab(sp, t.f[1], q, oy, 1);
  }
}

// ---------------------------------------------------------------------
// field on quadrature grid
// ---------------------------------------------------------------------

FieldOnQuad field_on_quad_spectral2(const FunctionSpace& space, const EvaluationTable& table,
                                    const DofVector& u) {
  const SpectralTable& sp = table.sp;
  const ShenTables st = build_shen_tables(sp);
  const int nf1 = st.nf1, nq1 = st.nq1;
  const int nq = nq1 * nq1;

  FieldOnQuad f;
  f.nq = nq;
  f.dim = 2;
  f.value.assign(nq, 0.0);
  f.grad[0].assign(nq, 0.0);
  f.grad[1].assign(nq, 0.0);
  f.hess[0].assign(nq, 0.0);
  f.hess[1].assign(nq, 0.0);
  f.hess[3].assign(nq, 0.0);

  // interior part: value = X0^T C Y0 etc., two-step contractions
  const double* c = u.coeffs.data(); // interior block is the leading (N-1)^2
  std::vector<double> tmp(static_cast<size_t>(nf1) * nq1);
  struct Combo {
    int ox, oy;
    std::vector<double>* out;
  };
  std::array<Combo, 6> combos = {{{0, 0, &f.value},
                                  {1, 0, &f.grad[0]},
                                  {0, 1, &f.grad[1]},
                                  {2, 0, &f.hess[0]},
                                  {0, 2, &f.hess[1]},
                                  {1, 1, &f.hess[3]}}};
  for (int oy = 0; oy <= 2; ++oy) {
    bool needed = false;
    for (const Combo& cb : combos) needed |= (cb.oy == oy);
    if (!needed) continue;
    // tmp[i][q] = sum_j C[i][j] Y_oy[j][q]
    const double* y = st.tab(1, oy);
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int i = 0; i < nf1; ++i) {
      double* trow = tmp.data() + static_cast<size_t>(i) * nq1;
      std::memset(trow, 0, sizeof(double) * nq1);
      for (int j = 0; j < nf1; ++j) {
        const double cij = c[i * nf1 + j];
        if (cij == 0.0) continue;
        const double* yr = y + static_cast<size_t>(j) * nq1;
        for (int q = 0; q < nq1; ++q) trow[q] += cij * yr[q];
      }
    }
    for (const Combo& cb : combos) {
      if (cb.oy != oy) continue;
      const double* x = st.tab(0, cb.ox);
      double* out = cb.out->data();
#pragma omp parallel for schedule(static) if (exec::parallel())
      for (int p = 0; p < nq1; ++p) {
        double* orow = out + static_cast<size_t>(p) * nq1;
        for (int i = 0; i < nf1; ++i) {
          const double xip = x[static_cast<size_t>(i) * nq1 + p];
          if (xip == 0.0) continue;
          const double* trow = tmp.data() + static_cast<size_t>(i) * nq1;
          for (int q = 0; q < nq1; ++q) orow[q] += xip * trow[q];
        }
      }
    }
  }

  // boundary (lift) part, term by term
  const int ni = space.n_free();
  for (int b = ni; b < space.dof_count; ++b) {
    const double cb = u.coeffs[b];
    if (cb == 0.0) continue;
    for (const SepTerm& t : sp.basis->dof_terms[b]) {
      add_term_grid_2d(sp, t, cb, 0, 0, f.value);
      add_term_grid_2d(sp, t, cb, 1, 0, f.grad[0]);
      add_term_grid_2d(sp, t, cb, 0, 1, f.grad[1]);
      add_term_grid_2d(sp, t, cb, 2, 0, f.hess[0]);
      add_term_grid_2d(sp, t, cb, 0, 2, f.hess[1]);
      add_term_grid_2d(sp, t, cb, 1, 1, f.hess[3]);
    }
  }
  return f;
}

FieldOnQuad field_on_quad_spectral3(const FunctionSpace& space, const EvaluationTable& table,
                                    const DofVector& u) {
  const SpectralTable& sp = table.sp;
  const int nq1 = sp.nq1, nq = nq1 * nq1 * nq1;
  FieldOnQuad f;
  f.nq = nq;
  f.dim = 3;
  f.value.assign(nq, 0.0);
  for (int d = 0; d < 3; ++d) f.grad[d].assign(nq, 0.0);
  for (int d = 0; d < 6; ++d) f.hess[d].assign(nq, 0.0);

  // ten derivative combinations, looped per DOF term (3-D runs stay small)
  const int orders[10][3] = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {2, 0, 0},
                             {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
  std::vector<double>* outs[10] = {&f.value,  &f.grad[0], &f.grad[1], &f.grad[2], &f.hess[0],
                                   &f.hess[1], &f.hess[2], &f.hess[3], &f.hess[4], &f.hess[5]};
  for (int dof = 0; dof < space.dof_count; ++dof) {
    const double c = u.coeffs[dof];
    if (c == 0.0) continue;
    for (const SepTerm& t : sp.basis->dof_terms[dof]) {
      for (int co = 0; co < 10; ++co) {
        double* out = outs[co]->data();
        for (int p = 0; p < nq1; ++p) {
          const double fx = c * t.c * sp_tab(sp, t.f[0], p, orders[co][0], 0);
          if (fx == 0.0) continue;
          for (int q = 0; q < nq1; ++q) {
            const double fxy = fx * sp_tab(sp, t.f[1], q, orders[co][1], 1);
            if (fxy == 0.0) continue;
            double* row = out + (static_cast<size_t>(p) * nq1 + q) * nq1;
            for (int r = 0; r < nq1; ++r)
              row[r] += fxy * sp_tab(sp, t.f[2], r, orders[co][2], 2);
          }
        }
      }
    }
  }
  return f;
}

FieldOnQuad field_on_quad_fem(const FunctionSpace&, const EvaluationTable& table,
                              const DofVector& u) {
  const FemTable& fem = table.fem;
  const int nql = fem.nq1 * fem.nq1;
  const int ncell = fem.nx * fem.ny;
  FieldOnQuad f;
  f.nq = ncell * nql;
  f.dim = 2;
  f.value.assign(f.nq, 0.0);
  f.grad[0].assign(f.nq, 0.0);
  f.grad[1].assign(f.nq, 0.0);
  f.hess[0].assign(f.nq, 0.0);
  f.hess[1].assign(f.nq, 0.0);
  f.hess[3].assign(f.nq, 0.0);

#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int cell = 0; cell < ncell; ++cell) {
    const int ex = cell % fem.nx, ey = cell / fem.nx;
    double loc[16];
    for (int a = 0; a < 4; ++a) {
      const int node = (ey + ((a >> 1) & 1)) * (fem.nx + 1) + (ex + (a & 1));
      for (int cc = 0; cc < 4; ++cc) loc[a * 4 + cc] = u.coeffs[4 * node + cc];
    }
    const int base = cell * nql;
    for (int q = 0; q < nql; ++q) {
      double v = 0, gx = 0, gy = 0, hxx = 0, hyy = 0, hxy = 0;
      for (int l = 0; l < 16; ++l) {
        const double cl = loc[l];
        if (cl == 0.0) continue;
        v += cl * fem.val[l * nql + q];
        gx += cl * fem.gx[l * nql + q];
        gy += cl * fem.gy[l * nql + q];
        hxx += cl * fem.gxx[l * nql + q];
        hyy += cl * fem.gyy[l * nql + q];
        hxy += cl * fem.gxy[l * nql + q];
      }
      f.value[base + q] = v;
      f.grad[0][base + q] = gx;
      f.grad[1][base + q] = gy;
      f.hess[0][base + q] = hxx;
      f.hess[1][base + q] = hyy;
      f.hess[3][base + q] = hxy;
    }
  }
  return f;
}

} // namespace

FieldOnQuad field_on_quad(const FunctionSpace& space, const EvaluationTable& table,
                          const DofVector& u) {
  check_space_match(space, u);
  check_space_match(space, table);
  if (space.kind == SpaceKind::hermite_fem) return field_on_quad_fem(space, table, u);
  return space.dim() == 2 ? field_on_quad_spectral2(space, table, u)
                          : field_on_quad_spectral3(space, table, u);
}

// ---------------------------------------------------------------------
// kernels
// ---------------------------------------------------------------------

namespace kernels {

void term_matrix_2d_reference(int nfx, int nfy, int nqx, int nqy, const double* c,
                              const double* xt, const double* yt, const double* xu,
                              const double* yu, DenseMatrix& m) {
  for (int i = 0; i < nfx; ++i)
    for (int j = 0; j < nfy; ++j)
      for (int k = 0; k < nfx; ++k)
        for (int l = 0; l < nfy; ++l) {
          double s = 0.0;
          for (int p = 0; p < nqx; ++p)
            for (int q = 0; q < nqy; ++q)
              s += c[p * nqy + q] * xt[i * nqx + p] * yt[j * nqy + q] * xu[k * nqx + p] *
                   yu[l * nqy + q];
          m(i * nfy + j, k * nfy + l) += s;
        }
}

void term_matrix_2d(int nfx, int nfy, int nqx, int nqy, const double* c, const double* xt,
                    const double* yt, const double* xu, const double* yu, DenseMatrix& m) {
  // stage 1: G[p][(j,l)] = sum_q c[p,q] yt[j,q] yu[l,q]
  std::vector<double> g(static_cast<size_t>(nqx) * nfy * nfy, 0.0);
  std::vector<double> ytT(static_cast<size_t>(nqy) * nfy), yuT(static_cast<size_t>(nqy) * nfy);
  for (int j = 0; j < nfy; ++j)
    for (int q = 0; q < nqy; ++q) {
      ytT[static_cast<size_t>(q) * nfy + j] = yt[j * nqy + q];
      yuT[static_cast<size_t>(q) * nfy + j] = yu[j * nqy + q];
    }
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int p = 0; p < nqx; ++p) {
    double* gp = g.data() + static_cast<size_t>(p) * nfy * nfy;
    for (int q = 0; q < nqy; ++q) {
      const double cpq = c[p * nqy + q];
      if (cpq == 0.0) continue;
      const double* ytq = ytT.data() + static_cast<size_t>(q) * nfy;
      const double* yuq = yuT.data() + static_cast<size_t>(q) * nfy;
      for (int j = 0; j < nfy; ++j) {
        const double w = cpq * ytq[j];
        if (w == 0.0) continue;
        double* grow = gp + static_cast<size_t>(j) * nfy;
        for (int l = 0; l < nfy; ++l) grow[l] += w * yuq[l];
      }
    }
  }
  // stage 2: M[(i,j),(k,l)] += sum_p xt[i,p] xu[k,p] G[p][(j,l)]
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int ik = 0; ik < nfx * nfx; ++ik) {
    const int i = ik / nfx, k = ik % nfx;
    thread_local std::vector<double> acc;
    acc.assign(static_cast<size_t>(nfy) * nfy, 0.0);
    for (int p = 0; p < nqx; ++p) {
      const double s = xt[i * nqx + p] * xu[k * nqx + p];
      if (s == 0.0) continue;
      const double* gp = g.data() + static_cast<size_t>(p) * nfy * nfy;
      for (size_t t = 0; t < acc.size(); ++t) acc[t] += s * gp[t];
    }
    for (int j = 0; j < nfy; ++j) {
      double* row = m.row(i * nfy + j) + static_cast<size_t>(k) * nfy;
      const double* arow = acc.data() + static_cast<size_t>(j) * nfy;
      for (int l = 0; l < nfy; ++l) row[l] += arow[l];
    }
  }
}

} // namespace kernels

// ---------------------------------------------------------------------
// linear forms
// ---------------------------------------------------------------------

namespace {

// contraction of a weighted coefficient grid against the interior test
// factors at derivative orders (ox, oy); boundary-DOF tests are not
// needed (forms act on free test functions only)
void functional_2d(const ShenTables& st,
                   const std::vector<double>& cw, int ox, int oy, std::vector<double>& out) {
  const int nf1 = st.nf1, nq1 = st.nq1;
  // tmp[i][q] = sum_p X[i][p] cw[p][q]
  std::vector<double> tmp(static_cast<size_t>(nf1) * nq1, 0.0);
  const double* x = st.tab(0, ox);
  for (int i = 0; i < nf1; ++i) {
    double* trow = tmp.data() + static_cast<size_t>(i) * nq1;
    for (int p = 0; p < nq1; ++p) {
      const double xip = x[static_cast<size_t>(i) * nq1 + p];
      if (xip == 0.0) continue;
      const double* crow = cw.data() + static_cast<size_t>(p) * nq1;
      for (int q = 0; q < nq1; ++q) trow[q] += xip * crow[q];
    }
  }
  const double* y = st.tab(1, oy);
  for (int i = 0; i < nf1; ++i) {
    const double* trow = tmp.data() + static_cast<size_t>(i) * nq1;
    for (int j = 0; j < nf1; ++j) {
      const double* yr = y + static_cast<size_t>(j) * nq1;
      double s = 0.0;
      for (int q = 0; q < nq1; ++q) s += trow[q] * yr[q];
      out[i * nf1 + j] += s;
    }
  }
}

double sp_face_normal_deriv(const SpectralTable& sp, int dim, const std::vector<SepTerm>& terms,
                            int f, int q) {
  const int nd = f / 2, side = f % 2;
  int tang[2], nt = 0;
  for (int d = 0; d < dim; ++d)
    if (d != nd) tang[nt++] = d;
  int pt[3] = {0, 0, 0};
  if (nt == 1) pt[tang[0]] = q;
  else {
    pt[tang[0]] = q / sp.nq1;
    pt[tang[1]] = q % sp.nq1;
  }
  const double sign = side == 0 ? -1.0 : 1.0;
  double sum = 0.0;
  for (const SepTerm& t : terms) {
    double prod = t.c * sign * sp.ed1[t.f[nd] * 2 + side] * sp.scale[nd];
    for (int k = 0; k < nt; ++k)
      prod *= sp.fval[t.f[tang[k]] * sp.nq1 + pt[tang[k]]];
    sum += prod;
  }
  return sum;
}

std::vector<double> linear_form_spectral(const FunctionSpace& space,
                                         const EvaluationTable& table,
                                         const LinearFormSpec& spec) {
  const SpectralTable& sp = table.sp;
  const int dim = sp.dim;
  const int nfree = space.n_free();
  std::vector<double> out(nfree, 0.0);
  const std::vector<double> w = weight_grid(sp);

  if (dim == 2) {
    const ShenTables st = build_shen_tables(sp);
    std::vector<double> cw(w.size());
    auto weighted = [&](const std::vector<double>& c) {
      for (size_t i = 0; i < w.size(); ++i) cw[i] = c[i] * w[i];
    };
    if (!spec.c_val.empty()) {
      weighted(spec.c_val);
      functional_2d(st, cw, 0, 0, out);
    }
    if (!spec.c_grad[0].empty()) {
      weighted(spec.c_grad[0]);
      functional_2d(st, cw, 1, 0, out);
    }
    if (!spec.c_grad[1].empty()) {
      weighted(spec.c_grad[1]);
      functional_2d(st, cw, 0, 1, out);
    }
    if (!spec.c_lap.empty()) {
      weighted(spec.c_lap);
      functional_2d(st, cw, 2, 0, out);
      functional_2d(st, cw, 0, 2, out);
    }
  } else {
    const int nq1 = sp.nq1;
    for (int dof = 0; dof < nfree; ++dof) {
      const auto& terms = sp.basis->dof_terms[dof];
      double s = 0.0;
      for (const SepTerm& t : terms) {
        for (int p = 0; p < nq1; ++p) {
          for (int q = 0; q < nq1; ++q) {
            for (int r = 0; r < nq1; ++r) {
              const int idx = (p * nq1 + q) * nq1 + r;
              const double wq = w[idx];
              double contrib = 0.0;
              auto fac = [&](int a, int b, int cdo) {
                return t.c * sp_tab(sp, t.f[0], p, a, 0) * sp_tab(sp, t.f[1], q, b, 1) *
                       sp_tab(sp, t.f[2], r, cdo, 2);
              };
              if (!spec.c_val.empty()) contrib += spec.c_val[idx] * fac(0, 0, 0);
              if (!spec.c_grad[0].empty()) contrib += spec.c_grad[0][idx] * fac(1, 0, 0);
              if (!spec.c_grad[1].empty()) contrib += spec.c_grad[1][idx] * fac(0, 1, 0);
              if (!spec.c_grad[2].empty()) contrib += spec.c_grad[2][idx] * fac(0, 0, 1);
              if (!spec.c_lap.empty())
                contrib += spec.c_lap[idx] * (fac(2, 0, 0) + fac(0, 2, 0) + fac(0, 0, 2));
              s += wq * contrib;
            }
          }
        }
      }
      out[dof] = s;
    }
  }

  if (!spec.c_face.empty()) {
    for (int f = 0; f < table.n_faces(); ++f) {
      if (spec.c_face[f].empty()) continue;
      const int nfp = table.n_face_points(f);
      for (int dof = 0; dof < nfree; ++dof) {
        const auto& terms = sp.basis->dof_terms[dof];
        double s = 0.0;
        for (int q = 0; q < nfp; ++q)
          s += spec.c_face[f][q] * table.face_weight(f, q) *
               sp_face_normal_deriv(sp, dim, terms, f, q);
        out[dof] += s;
      }
    }
  }
  return out;
}

std::vector<double> linear_form_fem(const FunctionSpace& space, const EvaluationTable& table,
                                    const LinearFormSpec& spec) {
  const FemTable& fem = table.fem;
  const int nql = fem.nq1 * fem.nq1;
  const int ncell = fem.nx * fem.ny;
  const int nfree = space.n_free();
  std::vector<double> out(nfree, 0.0);

  std::vector<double> locbuf(static_cast<size_t>(ncell) * 16);
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int cell = 0; cell < ncell; ++cell) {
    double* loc = locbuf.data() + static_cast<size_t>(cell) * 16;
    std::memset(loc, 0, 16 * sizeof(double));
    const int base = cell * nql;
    for (int q = 0; q < nql; ++q) {
      const double wq = fem.qw[q];
      const double cv = spec.c_val.empty() ? 0.0 : spec.c_val[base + q];
      const double cgx = spec.c_grad[0].empty() ? 0.0 : spec.c_grad[0][base + q];
      const double cgy = spec.c_grad[1].empty() ? 0.0 : spec.c_grad[1][base + q];
      const double cl = spec.c_lap.empty() ? 0.0 : spec.c_lap[base + q];
      for (int l = 0; l < 16; ++l) {
        double t = 0.0;
        if (cv != 0.0) t += cv * fem.val[l * nql + q];
        if (cgx != 0.0) t += cgx * fem.gx[l * nql + q];
        if (cgy != 0.0) t += cgy * fem.gy[l * nql + q];
        if (cl != 0.0) t += cl * (fem.gxx[l * nql + q] + fem.gyy[l * nql + q]);
        loc[l] += wq * t;
      }
    }
  }
  for (int cell = 0; cell < ncell; ++cell) {
    const double* loc = locbuf.data() + static_cast<size_t>(cell) * 16;
    for (int l = 0; l < 16; ++l) {
      const int fr = fem.cell_free[cell * 16 + l];
      if (fr >= 0) out[fr] += loc[l];
    }
  }

  if (!spec.c_face.empty()) {
    for (int f = 0; f < 4; ++f) {
      if (spec.c_face[f].empty()) continue;
      const int nd = f / 2;
      const int nseg = (nd == 0) ? fem.ny : fem.nx;
      for (int seg = 0; seg < nseg; ++seg) {
        const int cell = (nd == 0) ? ((f % 2 == 0 ? 0 : fem.nx - 1) + seg * fem.nx)
                                   : (seg + (f % 2 == 0 ? 0 : fem.ny - 1) * fem.nx);
        for (int p = 0; p < fem.nq1; ++p) {
          const int q = seg * fem.nq1 + p;
          const double cw = spec.c_face[f][q] * fem.face_qw[f][p];
          if (cw == 0.0) continue;
          for (int l = 0; l < 16; ++l) {
            const int fr = fem.cell_free[cell * 16 + l];
            if (fr >= 0) out[fr] += cw * fem.face_dn[f][l * fem.nq1 + p];
          }
        }
      }
    }
  }
  return out;
}

} // namespace

std::vector<double> assemble_linear_form(const FunctionSpace& space,
                                         const EvaluationTable& table,
                                         const LinearFormSpec& spec) {
  check_space_match(space, table);
  return space.kind == SpaceKind::spectral ? linear_form_spectral(space, table, spec)
                                           : linear_form_fem(space, table, spec);
}

std::vector<double> boundary_load(const FunctionSpace& space, const EvaluationTable& table,
                                  double eps, const std::function<double(const Point&)>& q) {
  check_space_match(space, table);
  LinearFormSpec spec;
  spec.c_face.resize(table.n_faces());
  for (int f = 0; f < table.n_faces(); ++f) {
    const int nfp = table.n_face_points(f);
    spec.c_face[f].resize(nfp);
    for (int p = 0; p < nfp; ++p) spec.c_face[f][p] = eps * q(table.face_point(f, p));
  }
  return assemble_linear_form(space, table, spec);
}

std::vector<double> assemble_load(const FunctionSpace& space, const EvaluationTable& table,
                                  const std::function<double(const Point&)>& f) {
  check_space_match(space, table);
  LinearFormSpec spec;
  const int nq = table.n_points();
  spec.c_val.resize(nq);
  for (int q = 0; q < nq; ++q) spec.c_val[q] = f(table.point(q));
  return assemble_linear_form(space, table, spec);
}

std::vector<double> assemble_residual(const FunctionSpace& space, const EvaluationTable& table,
                                      const ProblemSpec& p, double eps, const DofVector& u) {
  check_space_match(space, u);
  check_space_match(space, table);
  const FieldOnQuad fq = field_on_quad(space, table, u);
  const int nq = fq.nq;

  LinearFormSpec spec;
  spec.c_lap.resize(nq);
  spec.c_val.resize(nq);
  for (int q = 0; q < nq; ++q) {
    spec.c_lap[q] = -eps * fq.lap_at(q);
    spec.c_val[q] = hessian_det(fq.hess_at(q)) - p.f(table.point(q), eps);
  }
  spec.c_face.resize(table.n_faces());
  for (int f = 0; f < table.n_faces(); ++f) {
    const int nfp = table.n_face_points(f);
    spec.c_face[f].resize(nfp);
    for (int q = 0; q < nfp; ++q)
      spec.c_face[f][q] = eps * p.q_value(table.face_point(f, q), eps);
  }
  return assemble_linear_form(space, table, spec);
}

// ---------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------

namespace {

enum class MatKind { jacobian, b_form, b_identity };

// per-point cofactor component grids; 2-D order xx, yy, xy and 3-D the
// full six components
struct PhiGrids {
  std::array<std::vector<double>, 6> c; // xx, yy, zz, xy, xz, yz
};

PhiGrids phi_grids(const FieldOnQuad& fq) {
  PhiGrids ph;
  const int nq = fq.nq;
  if (fq.dim == 2) {
    ph.c[0].resize(nq);
    ph.c[1].resize(nq);
    ph.c[3].resize(nq);
    for (int q = 0; q < nq; ++q) {
      ph.c[0][q] = fq.hess[1][q];  // phi_xx = u_yy
      ph.c[1][q] = fq.hess[0][q];  // phi_yy = u_xx
      ph.c[3][q] = -fq.hess[3][q]; // phi_xy = -u_xy
    }
    return ph;
  }
  for (int k = 0; k < 6; ++k) ph.c[k].resize(nq);
  for (int q = 0; q < nq; ++q) {
    const SymMat phi = cofactor(fq.hess_at(q));
    ph.c[0][q] = phi(0, 0);
    ph.c[1][q] = phi(1, 1);
    ph.c[2][q] = phi(2, 2);
    ph.c[3][q] = phi(0, 1);
    ph.c[4][q] = phi(0, 2);
    ph.c[5][q] = phi(1, 2);
  }
  return ph;
}

AssembledOperator assemble_matrix_spectral2(const FunctionSpace& space,
                                            const EvaluationTable& table, double eps,
                                            const DofVector* u, MatKind kind) {
  const SpectralTable& sp = table.sp;
  const ShenTables st = build_shen_tables(sp);
  const int nf1 = st.nf1, nq1 = st.nq1;
  const int nfree = nf1 * nf1;

  AssembledOperator op;
  op.is_dense = true;
  op.epsilon = eps;
  op.space_id = space.id;
  op.dense = DenseMatrix(nfree, nfree);

  add_biharmonic(op.dense, kind == MatKind::jacobian ? -eps : eps, sp, st);

  if (kind == MatKind::b_identity) {
    add_gradient_identity(op.dense, 1.0, sp, st);
    return op;
  }

  const FieldOnQuad fq = field_on_quad(space, table, *u);
  const PhiGrids ph = phi_grids(fq);
  const std::vector<double> w = weight_grid(sp);
  std::vector<double> cw(w.size());
  auto weighted = [&](const std::vector<double>& c, double scale) {
    for (size_t i = 0; i < w.size(); ++i) cw[i] = scale * c[i] * w[i];
  };

  if (kind == MatKind::jacobian) {
    // (Phi : D^2 w, v): test value, trial second derivatives
    weighted(ph.c[0], 1.0);
    kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 0), st.tab(1, 0),
                            st.tab(0, 2), st.tab(1, 0), op.dense);
    weighted(ph.c[1], 1.0);
    kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 0), st.tab(1, 0),
                            st.tab(0, 0), st.tab(1, 2), op.dense);
    weighted(ph.c[3], 2.0);
    kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 0), st.tab(1, 0),
                            st.tab(0, 1), st.tab(1, 1), op.dense);
    return op;
  }

  // B form: (Phi Dv, Dw)
  weighted(ph.c[0], 1.0);
  kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 1), st.tab(1, 0),
                          st.tab(0, 1), st.tab(1, 0), op.dense);
  weighted(ph.c[1], 1.0);
  kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 0), st.tab(1, 1),
                          st.tab(0, 0), st.tab(1, 1), op.dense);
  // off-diagonal pair: assemble (phi_xy dv/dx, dw/dy) once, add its transpose
  DenseMatrix mxy(nfree, nfree);
  weighted(ph.c[3], 1.0);
  kernels::term_matrix_2d(nf1, nf1, nq1, nq1, cw.data(), st.tab(0, 1), st.tab(1, 0),
                          st.tab(0, 0), st.tab(1, 1), mxy);
  for (int r = 0; r < nfree; ++r)
    for (int c = 0; c < nfree; ++c) op.dense(r, c) += mxy(r, c) + mxy(c, r);
  return op;
}

AssembledOperator assemble_matrix_spectral3(const FunctionSpace& space,
                                            const EvaluationTable& table, double eps,
                                            const DofVector* u, MatKind kind) {
  const SpectralTable& sp = table.sp;
  const ShenTables st = build_shen_tables(sp);
  const int nf1 = st.nf1, nq1 = st.nq1;
  const int nfree = nf1 * nf1 * nf1;
  const int nq = nq1 * nq1 * nq1;

  AssembledOperator op;
  op.is_dense = true;
  op.epsilon = eps;
  op.space_id = space.id;
  op.dense = DenseMatrix(nfree, nfree);

  add_biharmonic(op.dense, kind == MatKind::jacobian ? -eps : eps, sp, st);
  if (kind == MatKind::b_identity) {
    add_gradient_identity(op.dense, 1.0, sp, st);
    return op;
  }

  const FieldOnQuad fq = field_on_quad(space, table, *u);
  const PhiGrids ph = phi_grids(fq);
  const std::vector<double> w = weight_grid(sp);

  // dense per-DOF derivative tables; 3-D runs are small by design
  auto dof_table = [&](int ox, int oy, int oz) {
    std::vector<double> t(static_cast<size_t>(nfree) * nq);
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int dof = 0; dof < nfree; ++dof) {
      const int i = dof / (nf1 * nf1), j = (dof / nf1) % nf1, k = dof % nf1;
      double* row = t.data() + static_cast<size_t>(dof) * nq;
      for (int p = 0; p < nq1; ++p) {
        const double fx = sp_tab(sp, sp.basis->shen(i), p, ox, 0);
        for (int q = 0; q < nq1; ++q) {
          const double fxy = fx * sp_tab(sp, sp.basis->shen(j), q, oy, 1);
          for (int r = 0; r < nq1; ++r)
            row[(p * nq1 + q) * nq1 + r] = fxy * sp_tab(sp, sp.basis->shen(k), r, oz, 2);
        }
      }
    }
    return t;
  };

  if (kind == MatKind::jacobian) {
    const std::vector<double> val = dof_table(0, 0, 0);
    // s_c(q) = w_q * (Phi : D^2 phi_c)(q)
    std::vector<double> s(static_cast<size_t>(nfree) * nq, 0.0);
    const int combos[6][3] = {{2, 0, 0}, {0, 2, 0}, {0, 0, 2}, {1, 1, 0}, {1, 0, 1}, {0, 1, 1}};
    const double mult[6] = {1, 1, 1, 2, 2, 2};
    for (int t = 0; t < 6; ++t) {
      const std::vector<double> dt = dof_table(combos[t][0], combos[t][1], combos[t][2]);
#pragma omp parallel for schedule(static) if (exec::parallel())
      for (int dof = 0; dof < nfree; ++dof) {
        const double* dr = dt.data() + static_cast<size_t>(dof) * nq;
        double* sr = s.data() + static_cast<size_t>(dof) * nq;
        const double* pc = ph.c[t].data();
        for (int q = 0; q < nq; ++q) sr[q] += mult[t] * pc[q] * dr[q];
      }
    }
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int r = 0; r < nfree; ++r) {
      const double* vr = val.data() + static_cast<size_t>(r) * nq;
      double* row = op.dense.row(r);
      for (int c = 0; c < nfree; ++c) {
        const double* sc = s.data() + static_cast<size_t>(c) * nq;
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) acc += w[q] * vr[q] * sc[q];
        row[c] += acc;
      }
    }
    return op;
  }

  // B form gradient part: sum_ab (phi_ab da v, db w)
  const std::vector<double> gx = dof_table(1, 0, 0);
  const std::vector<double> gy = dof_table(0, 1, 0);
  const std::vector<double> gz = dof_table(0, 0, 1);
  const std::vector<double>* gs[3] = {&gx, &gy, &gz};
  // sd_c(q) = w_q * (Phi grad phi_c)_d(q)
  for (int d = 0; d < 3; ++d) {
    std::vector<double> s(static_cast<size_t>(nfree) * nq, 0.0);
    const int comp[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}}; // phi component indices
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int c = 0; c < nfree; ++c) {
      double* sr = s.data() + static_cast<size_t>(c) * nq;
      for (int e = 0; e < 3; ++e) {
        const double* ge = gs[e]->data() + static_cast<size_t>(c) * nq;
        const double* pc = ph.c[comp[d][e]].data();
        for (int q = 0; q < nq; ++q) sr[q] += pc[q] * ge[q];
      }
    }
#pragma omp parallel for schedule(static) if (exec::parallel())
    for (int r = 0; r < nfree; ++r) {
      const double* gr = gs[d]->data() + static_cast<size_t>(r) * nq;
      double* row = op.dense.row(r);
      for (int c = 0; c < nfree; ++c) {
        const double* sc = s.data() + static_cast<size_t>(c) * nq;
        double acc = 0.0;
        for (int q = 0; q < nq; ++q) acc += w[q] * gr[q] * sc[q];
        row[c] += acc;
      }
    }
  }
  return op;
}

AssembledOperator assemble_matrix_fem(const FunctionSpace& space, const EvaluationTable& table,
                                      double eps, const DofVector* u, MatKind kind) {
  const FemTable& fem = table.fem;
  const int nql = fem.nq1 * fem.nq1;
  const int ncell = fem.nx * fem.ny;
  const int nfree = space.n_free();

  AssembledOperator op;
  op.is_dense = false;
  op.epsilon = eps;
  op.space_id = space.id;
  op.csr.n = nfree;
  op.csr.row_ptr = fem.csr_row_ptr;
  op.csr.col = fem.csr_col;
  op.csr.val.assign(fem.csr_col.size(), 0.0);

  FieldOnQuad fq;
  if (kind != MatKind::b_identity) fq = field_on_quad(space, table, *u);

  std::vector<double> locbuf(static_cast<size_t>(ncell) * 256);
#pragma omp parallel for schedule(static) if (exec::parallel())
  for (int cell = 0; cell < ncell; ++cell) {
    double* loc = locbuf.data() + static_cast<size_t>(cell) * 256;
    std::memset(loc, 0, 256 * sizeof(double));
    const int base = cell * nql;
    for (int q = 0; q < nql; ++q) {
      const double wq = fem.qw[q];
      double pxx = 1.0, pyy = 1.0, pxy = 0.0;
      if (kind != MatKind::b_identity) {
        pxx = fq.hess[1][base + q];  // phi_xx = u_yy
        pyy = fq.hess[0][base + q];  // phi_yy = u_xx
        pxy = -fq.hess[3][base + q]; // phi_xy
      }
      for (int a = 0; a < 16; ++a) {
        const double la = fem.gxx[a * nql + q] + fem.gyy[a * nql + q];
        const double va = fem.val[a * nql + q];
        const double gxa = fem.gx[a * nql + q], gya = fem.gy[a * nql + q];
        for (int b = 0; b < 16; ++b) {
          const double lb = fem.gxx[b * nql + q] + fem.gyy[b * nql + q];
          double t;
          if (kind == MatKind::jacobian) {
            const double phiD2b = pxx * fem.gxx[b * nql + q] + pyy * fem.gyy[b * nql + q] +
                                  2.0 * pxy * fem.gxy[b * nql + q];
            t = -eps * la * lb + phiD2b * va;
          } else {
            const double gxb = fem.gx[b * nql + q], gyb = fem.gy[b * nql + q];
            t = eps * la * lb + pxx * gxa * gxb + pyy * gya * gyb +
                pxy * (gxa * gyb + gya * gxb);
          }
          loc[a * 16 + b] += wq * t;
        }
      }
    }
  }
  // ordered scatter keeps the accumulation deterministic
  for (int cell = 0; cell < ncell; ++cell) {
    const double* loc = locbuf.data() + static_cast<size_t>(cell) * 256;
    const int* sc = fem.scatter.data() + static_cast<size_t>(cell) * 256;
    for (int t = 0; t < 256; ++t)
      if (sc[t] >= 0) op.csr.val[sc[t]] += loc[t];
  }
  return op;
}

AssembledOperator assemble_matrix(const FunctionSpace& space, const EvaluationTable& table,
                                  double eps, const DofVector* u, MatKind kind) {
  check_space_match(space, table);
  if (u) check_space_match(space, *u);
  if (space.kind == SpaceKind::hermite_fem)
    return assemble_matrix_fem(space, table, eps, u, kind);
  return space.dim() == 2 ? assemble_matrix_spectral2(space, table, eps, u, kind)
                          : assemble_matrix_spectral3(space, table, eps, u, kind);
}

} // namespace

AssembledOperator assemble_jacobian(const FunctionSpace& space, const EvaluationTable& table,
                                    double eps, const DofVector& u) {
  return assemble_matrix(space, table, eps, &u, MatKind::jacobian);
}

AssembledOperator assemble_B_form(const FunctionSpace& space, const EvaluationTable& table,
                                  double eps, const DofVector& u) {
  return assemble_matrix(space, table, eps, &u, MatKind::b_form);
}

AssembledOperator assemble_B_form_identity(const FunctionSpace& space,
                                           const EvaluationTable& table, double eps) {
  return assemble_matrix(space, table, eps, nullptr, MatKind::b_identity);
}

} // namespace vmma
