#include "vmma/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace vmma {

const char* to_string(SpaceKind k) {
  return k == SpaceKind::spectral ? "spectral" : "hermite_fem";
}

bool BoxDomain::contains(const Point& p, double tol) const {
  for (int d = 0; d < dim; ++d)
    if (p[d] < lower[d] - tol || p[d] > upper[d] + tol) return false;
  return true;
}

void BoxDomain::validate() const {
  if (dim != 2 && dim != 3) throw std::invalid_argument("BoxDomain: dim must be 2 or 3");
  for (int d = 0; d < dim; ++d)
    if (!(lower[d] < upper[d])) throw std::invalid_argument("BoxDomain: lower must be < upper");
}

Point FunctionSpace::node_coords(int i, int j) const {
  return {domain.lower[0] + i * (domain.length(0) / nx),
          domain.lower[1] + j * (domain.length(1) / ny), 0.0};
}

Point FunctionSpace::site_coords(const std::array<int, 3>& g) const {
  Point p{0, 0, 0};
  for (int d = 0; d < domain.dim; ++d)
    p[d] = domain.lower[d] + 0.5 * (lobatto[g[d]] + 1.0) * domain.length(d);
  return p;
}

namespace {

// Evaluate a polynomial given by Legendre coefficients, with first and
// second derivatives, at a reference coordinate.
void eval_coef(std::span<const double> coef, double x, double& v, double& d1, double& d2) {
  const int n = static_cast<int>(coef.size()) - 1;
  thread_local std::vector<double> lv, l1, l2;
  lv.resize(n + 1);
  l1.resize(n + 1);
  l2.resize(n + 1);
  legendre_all(n, x, lv.data(), l1.data(), l2.data());
  v = d1 = d2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    v += coef[k] * lv[k];
    d1 += coef[k] * l1[k];
    d2 += coef[k] * l2[k];
  }
}

std::shared_ptr<const SpectralBasis> build_spectral_basis(int n, int dim,
                                                          const std::vector<double>& lobatto) {
  auto basis = std::make_shared<SpectralBasis>();
  basis->n = n;
  basis->dim = dim;
  basis->n_fun = 2 * n + 3;
  basis->fun_coef.assign(basis->n_fun, {});

  for (int k = 0; k <= n - 2; ++k) {
    std::vector<double> c(n + 1, 0.0);
    c[k] = 1.0;
    c[k + 2] = -1.0;
    basis->fun_coef[basis->shen(k)] = std::move(c);
  }

  // Lagrange cardinals of the Lobatto sites, projected onto Legendre
  // coefficients with an (N+1)-point Gauss rule (exact, degree 2N).
  const QuadRule1D gauss = gauss_legendre_rule(n + 1);
  std::vector<double> lv(n + 1), l1(n + 1), l2(n + 1);
  for (int m = 0; m <= n; ++m) {
    std::vector<double> c(n + 1, 0.0);
    for (int q = 0; q <= n; ++q) {
      const double x = gauss.nodes[q];
      double card = 1.0;
      for (int j = 0; j <= n; ++j)
        if (j != m) card *= (x - lobatto[j]) / (lobatto[m] - lobatto[j]);
      legendre_all(n, x, lv.data(), l1.data(), l2.data());
      const double wc = gauss.weights[q] * card;
      for (int k = 0; k <= n; ++k) c[k] += wc * lv[k];
    }
    for (int k = 0; k <= n; ++k) c[k] *= (2.0 * k + 1.0) / 2.0;
    basis->fun_coef[basis->cardinal(m)] = std::move(c);
  }

  basis->fun_coef[basis->blend(0)] = {0.5, -0.5};
  basis->fun_coef[basis->blend(1)] = {0.5, 0.5};
  basis->fun_coef[basis->one()] = {1.0};

  // DOF expansions. Interior tensor products first, then the
  // transfinite-blending cardinals of the boundary sites: one blended
  // face term per boundary plane through the site, minus edge terms,
  // plus the corner term (inclusion-exclusion of the Boolean sum).
  const int ni1 = n - 1;
  if (dim == 2) {
    basis->dof_terms.reserve(static_cast<size_t>(ni1) * ni1 + 4 * n);
    for (int i = 0; i < ni1; ++i)
      for (int j = 0; j < ni1; ++j)
        basis->dof_terms.push_back({SepTerm{1.0, {basis->shen(i), basis->shen(j), 0}}});
    for (int p = 0; p <= n; ++p) {
      for (int q = 0; q <= n; ++q) {
        const bool onx = (p == 0 || p == n), ony = (q == 0 || q == n);
        if (!onx && !ony) continue;
        const int bx = basis->blend(p == n), by = basis->blend(q == n);
        std::vector<SepTerm> terms;
        if (onx && ony) {
          terms.push_back({1.0, {basis->cardinal(p), by, 0}});
          terms.push_back({1.0, {bx, basis->cardinal(q), 0}});
          terms.push_back({-1.0, {bx, by, 0}});
        } else if (ony) {
          terms.push_back({1.0, {basis->cardinal(p), by, 0}});
        } else {
          terms.push_back({1.0, {bx, basis->cardinal(q), 0}});
        }
        basis->dof_terms.push_back(std::move(terms));
      }
    }
  } else {
    for (int i = 0; i < ni1; ++i)
      for (int j = 0; j < ni1; ++j)
        for (int k = 0; k < ni1; ++k)
          basis->dof_terms.push_back(
              {SepTerm{1.0, {basis->shen(i), basis->shen(j), basis->shen(k)}}});
    for (int p = 0; p <= n; ++p) {
      for (int q = 0; q <= n; ++q) {
        for (int r = 0; r <= n; ++r) {
          const std::array<int, 3> g{p, q, r};
          std::array<bool, 3> on{};
          int nb = 0;
          for (int d = 0; d < 3; ++d) {
            on[d] = (g[d] == 0 || g[d] == n);
            nb += on[d];
          }
          if (nb == 0) continue;
          std::vector<SepTerm> terms;
          auto factor = [&](int d, bool blended) {
            return blended ? basis->blend(g[d] == n) : basis->cardinal(g[d]);
          };
          for (int d = 0; d < 3; ++d) {
            if (!on[d]) continue;
            SepTerm t{1.0, {}};
            for (int e = 0; e < 3; ++e) t.f[e] = factor(e, e == d);
            terms.push_back(t);
          }
          for (int d1 = 0; d1 < 3; ++d1) {
            for (int d2 = d1 + 1; d2 < 3; ++d2) {
              if (!on[d1] || !on[d2]) continue;
              SepTerm t{-1.0, {}};
              for (int e = 0; e < 3; ++e) t.f[e] = factor(e, e == d1 || e == d2);
              terms.push_back(t);
            }
          }
          if (nb == 3) {
            SepTerm t{1.0, {}};
            for (int e = 0; e < 3; ++e) t.f[e] = factor(e, true);
            terms.push_back(t);
          }
          basis->dof_terms.push_back(std::move(terms));
        }
      }
    }
  }
  return basis;
}

} // namespace

FunctionSpace build_space(SpaceKind kind, const BoxDomain& domain, int order_or_nx, int ny) {
  domain.validate();
  FunctionSpace s;
  s.kind = kind;
  s.domain = domain;

  if (kind == SpaceKind::spectral) {
    const int n = order_or_nx;
    if (n < 2) throw std::invalid_argument("build_space: spectral order must be >= 2");
    s.order = n;
    s.h = 1.0 / n;
    s.lobatto = lobatto_points(n);
    s.sbasis = build_spectral_basis(n, domain.dim, s.lobatto);

    const int ni1 = n - 1;
    const int dim = domain.dim;
    int ni = 1;
    for (int d = 0; d < dim; ++d) ni *= ni1;
    // boundary sites of the (N+1)^dim Lobatto grid, lexicographic
    if (dim == 2) {
      for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q)
          if (p == 0 || p == n || q == 0 || q == n) s.boundary_site.push_back({p, q, 0});
    } else {
      for (int p = 0; p <= n; ++p)
        for (int q = 0; q <= n; ++q)
          for (int r = 0; r <= n; ++r)
            if (p == 0 || p == n || q == 0 || q == n || r == 0 || r == n)
              s.boundary_site.push_back({p, q, r});
    }
    s.dof_count = ni + static_cast<int>(s.boundary_site.size());
    s.free_dofs.resize(ni);
    for (int i = 0; i < ni; ++i) s.free_dofs[i] = i;
    s.constrained_dofs.resize(s.boundary_site.size());
    for (size_t i = 0; i < s.boundary_site.size(); ++i)
      s.constrained_dofs[i] = ni + static_cast<int>(i);
    char buf[160];
    std::snprintf(buf, sizeof buf, "spectral:d%d:N%d:[%g,%g]x[%g,%g]x[%g,%g]", dim, n,
                  domain.lower[0], domain.upper[0], domain.lower[1], domain.upper[1],
                  dim == 3 ? domain.lower[2] : 0.0, dim == 3 ? domain.upper[2] : 0.0);
    s.id = buf;
  } else {
    if (domain.dim != 2)
      throw std::invalid_argument("build_space: hermite_fem supports dim 2 only");
    const int nx = order_or_nx;
    const int nyy = (ny < 0) ? nx : ny;
    if (nx < 1 || nyy < 1) throw std::invalid_argument("build_space: mesh counts must be >= 1");
    s.nx = nx;
    s.ny = nyy;
    s.h = std::max(domain.length(0) / nx, domain.length(1) / nyy);
    s.dof_count = 4 * (nx + 1) * (nyy + 1);
    // per node [value, dx, dy, dxy]; boundary constrains the value and
    // the tangential first derivatives (both at corners); dxy is free
    std::vector<bool> constrained(s.dof_count, false);
    for (int j = 0; j <= nyy; ++j) {
      for (int i = 0; i <= nx; ++i) {
        const bool onx = (i == 0 || i == nx), ony = (j == 0 || j == nyy);
        if (!onx && !ony) continue;
        const int base = 4 * s.node_index(i, j);
        constrained[base] = true;
        if (onx && ony) {
          constrained[base + 1] = true;
          constrained[base + 2] = true;
        } else if (onx) {
          constrained[base + 2] = true; // tangential along y
        } else {
          constrained[base + 1] = true; // tangential along x
        }
      }
    }
    for (int d = 0; d < s.dof_count; ++d)
      (constrained[d] ? s.constrained_dofs : s.free_dofs).push_back(d);
    char buf[160];
    std::snprintf(buf, sizeof buf, "hermite_fem:%dx%d:[%g,%g]x[%g,%g]", nx, nyy,
                  domain.lower[0], domain.upper[0], domain.lower[1], domain.upper[1]);
    s.id = buf;
  }

  s.free_index.assign(s.dof_count, -1);
  for (size_t i = 0; i < s.free_dofs.size(); ++i) s.free_index[s.free_dofs[i]] = static_cast<int>(i);
  return s;
}

DofVector zero_dof_vector(const FunctionSpace& space) {
  return DofVector{space.id, std::vector<double>(space.dof_count, 0.0)};
}

void check_space_match(const FunctionSpace& space, const DofVector& v) {
  if (v.space_id != space.id || static_cast<int>(v.coeffs.size()) != space.dof_count)
    throw std::invalid_argument("DofVector does not belong to this space");
}

void check_space_match(const FunctionSpace& space, const EvaluationTable& t) {
  if (t.space_id != space.id)
    throw std::invalid_argument("EvaluationTable does not belong to this space");
}

int default_quad_order(const FunctionSpace& space) {
  if (space.kind == SpaceKind::spectral) {
    // exact for det(D^2 u_h) v_h, the highest-degree assembly integrand
    const int dim = space.dim();
    return (dim + 1) * space.order / 2 + ((dim + 1) * space.order % 2 ? 1 : 0) + 2;
  }
  return 8;
}

// ---------------------------------------------------------------------
// Tabulation
// ---------------------------------------------------------------------

namespace {

void hermite_factors(double t, double h, double* v, double* d1, double* d2) {
  // value/slope shapes on [0,1] with physical slope scaling; d's are
  // derivatives in the physical coordinate
  const double t2 = t * t, t3 = t2 * t;
  v[0] = 2 * t3 - 3 * t2 + 1;
  v[1] = h * (t3 - 2 * t2 + t);
  v[2] = -2 * t3 + 3 * t2;
  v[3] = h * (t3 - t2);
  const double s = 1.0 / h;
  d1[0] = (6 * t2 - 6 * t) * s;
  d1[1] = 3 * t2 - 4 * t + 1;
  d1[2] = (-6 * t2 + 6 * t) * s;
  d1[3] = 3 * t2 - 2 * t;
  d2[0] = (12 * t - 6) * s * s;
  d2[1] = (6 * t - 4) * s;
  d2[2] = (-12 * t + 6) * s * s;
  d2[3] = (6 * t - 2) * s;
}

} // namespace

EvaluationTable tabulate(const FunctionSpace& space, int quad_points_per_direction) {
  if (quad_points_per_direction < 2)
    throw std::invalid_argument("tabulate: need at least 2 quadrature points per direction");

  EvaluationTable t;
  t.kind = space.kind;
  t.dim = space.dim();
  t.quad_order = quad_points_per_direction;
  t.space_id = space.id;
  t.domain = space.domain;

  if (space.kind == SpaceKind::spectral) {
    SpectralTable& sp = t.sp;
    sp.basis = space.sbasis;
    sp.n = space.order;
    sp.dim = t.dim;
    sp.nq1 = quad_points_per_direction;
    sp.ref_rule = gauss_legendre_rule(sp.nq1);

    const int nf = sp.basis->n_fun, nq = sp.nq1;
    sp.fval.assign(static_cast<size_t>(nf) * nq, 0.0);
    sp.fd1.assign(static_cast<size_t>(nf) * nq, 0.0);
    sp.fd2.assign(static_cast<size_t>(nf) * nq, 0.0);
    for (int f = 0; f < nf; ++f) {
      for (int p = 0; p < nq; ++p) {
        double v, d1, d2;
        eval_coef(sp.basis->fun_coef[f], sp.ref_rule.nodes[p], v, d1, d2);
        sp.fval[f * nq + p] = v;
        sp.fd1[f * nq + p] = d1;
        sp.fd2[f * nq + p] = d2;
      }
    }
    sp.eval.assign(static_cast<size_t>(nf) * 2, 0.0);
    sp.ed1.assign(static_cast<size_t>(nf) * 2, 0.0);
    sp.ed2.assign(static_cast<size_t>(nf) * 2, 0.0);
    for (int f = 0; f < nf; ++f) {
      for (int side = 0; side < 2; ++side) {
        double v, d1, d2;
        eval_coef(sp.basis->fun_coef[f], side == 0 ? -1.0 : 1.0, v, d1, d2);
        sp.eval[f * 2 + side] = v;
        sp.ed1[f * 2 + side] = d1;
        sp.ed2[f * 2 + side] = d2;
      }
    }
    for (int d = 0; d < t.dim; ++d) {
      const QuadRule1D mapped =
          map_rule(sp.ref_rule, space.domain.lower[d], space.domain.upper[d]);
      sp.nodes_d[d] = mapped.nodes;
      sp.weights_d[d] = mapped.weights;
      sp.scale[d] = 2.0 / space.domain.length(d);
    }
    return t;
  }

  FemTable& fem = t.fem;
  fem.nx = space.nx;
  fem.ny = space.ny;
  fem.nq1 = quad_points_per_direction;
  fem.hx = space.domain.length(0) / space.nx;
  fem.hy = space.domain.length(1) / space.ny;

  const QuadRule1D unit = map_rule(gauss_legendre_rule(fem.nq1), 0.0, 1.0);
  const int nq1 = fem.nq1, nq = nq1 * nq1;
  // x/y factor tables at the unit quadrature points
  std::vector<double> xv(4 * nq1), xd(4 * nq1), xdd(4 * nq1);
  std::vector<double> yv(4 * nq1), yd(4 * nq1), ydd(4 * nq1);
  for (int p = 0; p < nq1; ++p) {
    double v[4], d1[4], d2[4];
    hermite_factors(unit.nodes[p], fem.hx, v, d1, d2);
    for (int f = 0; f < 4; ++f) {
      xv[f * nq1 + p] = v[f];
      xd[f * nq1 + p] = d1[f];
      xdd[f * nq1 + p] = d2[f];
    }
    hermite_factors(unit.nodes[p], fem.hy, v, d1, d2);
    for (int f = 0; f < 4; ++f) {
      yv[f * nq1 + p] = v[f];
      yd[f * nq1 + p] = d1[f];
      ydd[f * nq1 + p] = d2[f];
    }
  }

  fem.val.assign(16 * nq, 0.0);
  fem.gx.assign(16 * nq, 0.0);
  fem.gy.assign(16 * nq, 0.0);
  fem.gxx.assign(16 * nq, 0.0);
  fem.gxy.assign(16 * nq, 0.0);
  fem.gyy.assign(16 * nq, 0.0);
  fem.qx.assign(nq, 0.0);
  fem.qy.assign(nq, 0.0);
  fem.qw.assign(nq, 0.0);
  for (int px = 0; px < nq1; ++px) {
    for (int py = 0; py < nq1; ++py) {
      const int q = px * nq1 + py;
      fem.qx[q] = unit.nodes[px] * fem.hx;
      fem.qy[q] = unit.nodes[py] * fem.hy;
      fem.qw[q] = unit.weights[px] * unit.weights[py] * fem.hx * fem.hy;
      for (int a = 0; a < 4; ++a) {   // node: (0,0),(1,0),(0,1),(1,1)
        for (int c = 0; c < 4; ++c) { // comp: value, dx, dy, dxy
          const int l = a * 4 + c;
          const int fx = 2 * (a & 1) + ((c == 1 || c == 3) ? 1 : 0);
          const int fy = 2 * ((a >> 1) & 1) + ((c == 2 || c == 3) ? 1 : 0);
          fem.val[l * nq + q] = xv[fx * nq1 + px] * yv[fy * nq1 + py];
          fem.gx[l * nq + q] = xd[fx * nq1 + px] * yv[fy * nq1 + py];
          fem.gy[l * nq + q] = xv[fx * nq1 + px] * yd[fy * nq1 + py];
          fem.gxx[l * nq + q] = xdd[fx * nq1 + px] * yv[fy * nq1 + py];
          fem.gxy[l * nq + q] = xd[fx * nq1 + px] * yd[fy * nq1 + py];
          fem.gyy[l * nq + q] = xv[fx * nq1 + px] * ydd[fy * nq1 + py];
        }
      }
    }
  }

  // free-DOF CSR pattern and per-cell scatter positions
  {
    const int ncell = fem.nx * fem.ny;
    const int nfree = space.n_free();
    fem.cell_free.assign(static_cast<size_t>(ncell) * 16, -1);
    std::vector<std::vector<int>> adj(nfree);
    for (int cell = 0; cell < ncell; ++cell) {
      const int ex = cell % fem.nx, ey = cell / fem.nx;
      int gl[16];
      for (int a = 0; a < 4; ++a) {
        const int node = (ey + ((a >> 1) & 1)) * (fem.nx + 1) + (ex + (a & 1));
        for (int c = 0; c < 4; ++c) gl[a * 4 + c] = 4 * node + c;
      }
      for (int a = 0; a < 16; ++a) {
        const int fr = space.free_index[gl[a]];
        fem.cell_free[cell * 16 + a] = fr;
        if (fr < 0) continue;
        for (int b = 0; b < 16; ++b) {
          const int fc = space.free_index[gl[b]];
          if (fc >= 0) adj[fr].push_back(fc);
        }
      }
    }
    fem.csr_row_ptr.assign(nfree + 1, 0);
    for (int r = 0; r < nfree; ++r) {
      auto& v = adj[r];
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      fem.csr_row_ptr[r + 1] = fem.csr_row_ptr[r] + static_cast<int>(v.size());
    }
    fem.csr_col.resize(fem.csr_row_ptr[nfree]);
    for (int r = 0; r < nfree; ++r)
      std::copy(adj[r].begin(), adj[r].end(), fem.csr_col.begin() + fem.csr_row_ptr[r]);
    auto slot = [&](int r, int c) {
      int lo = fem.csr_row_ptr[r], hi = fem.csr_row_ptr[r + 1];
      while (lo < hi) {
        const int mid = (lo + hi) / 2;
        if (fem.csr_col[mid] < c) lo = mid + 1;
        else hi = mid;
      }
      return lo;
    };
    fem.scatter.assign(static_cast<size_t>(ncell) * 256, -1);
    for (int cell = 0; cell < ncell; ++cell) {
      for (int a = 0; a < 16; ++a) {
        const int fr = fem.cell_free[cell * 16 + a];
        if (fr < 0) continue;
        for (int b = 0; b < 16; ++b) {
          const int fc = fem.cell_free[cell * 16 + b];
          if (fc >= 0) fem.scatter[cell * 256 + a * 16 + b] = slot(fr, fc);
        }
      }
    }
  }

  // boundary traces of the reference element; the normal derivative
  // carries the outward sign
  double v0[4], d10[4], d20[4], v1[4], d11[4], d21[4];
  for (int side_dim = 0; side_dim < 2; ++side_dim) {
    const double hn = (side_dim == 0) ? fem.hx : fem.hy;
    const double ht = (side_dim == 0) ? fem.hy : fem.hx;
    hermite_factors(0.0, hn, v0, d10, d20);
    hermite_factors(1.0, hn, v1, d11, d21);
    for (int side = 0; side < 2; ++side) {
      const int f = 2 * side_dim + side;
      const double* nv = (side == 0) ? v0 : v1;
      const double* nd = (side == 0) ? d10 : d11;
      const double sign = (side == 0) ? -1.0 : 1.0;
      fem.face_dn[f].assign(16 * nq1, 0.0);
      fem.face_qt[f].assign(nq1, 0.0);
      fem.face_qw[f].assign(nq1, 0.0);
      for (int p = 0; p < nq1; ++p) {
        fem.face_qt[f][p] = unit.nodes[p] * ht;
        fem.face_qw[f][p] = unit.weights[p] * ht;
        double tv[4], td[4], tdd[4];
        hermite_factors(unit.nodes[p], ht, tv, td, tdd);
        for (int a = 0; a < 4; ++a) {
          for (int c = 0; c < 4; ++c) {
            const int l = a * 4 + c;
            const int fx = 2 * (a & 1) + ((c == 1 || c == 3) ? 1 : 0);
            const int fy = 2 * ((a >> 1) & 1) + ((c == 2 || c == 3) ? 1 : 0);
            const int fn = (side_dim == 0) ? fx : fy;
            const int ft = (side_dim == 0) ? fy : fx;
            fem.face_dn[f][l * nq1 + p] = sign * nd[fn] * tv[ft];
            (void)nv;
          }
        }
      }
    }
  }
  return t;
}

// ---------------------------------------------------------------------
// EvaluationTable accessors
// ---------------------------------------------------------------------

int EvaluationTable::n_points() const {
  if (kind == SpaceKind::spectral) {
    int n = 1;
    for (int d = 0; d < dim; ++d) n *= sp.nq1;
    return n;
  }
  return fem.nx * fem.ny * fem.nq1 * fem.nq1;
}

int EvaluationTable::n_cells() const {
  return kind == SpaceKind::spectral ? 1 : fem.nx * fem.ny;
}

int EvaluationTable::cell_of_point(int q) const {
  return kind == SpaceKind::spectral ? 0 : q / (fem.nq1 * fem.nq1);
}

std::vector<int> EvaluationTable::cell_dofs(int cell) const {
  if (kind == SpaceKind::spectral) {
    std::vector<int> all(sp.basis->dof_terms.size());
    for (size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
  }
  const int ex = cell % fem.nx, ey = cell / fem.nx;
  std::vector<int> dofs(16);
  for (int a = 0; a < 4; ++a) {
    const int node = (ey + ((a >> 1) & 1)) * (fem.nx + 1) + (ex + (a & 1));
    for (int c = 0; c < 4; ++c) dofs[a * 4 + c] = 4 * node + c;
  }
  return dofs;
}

bool EvaluationTable::supported(int dof, int q) const {
  if (kind == SpaceKind::spectral) return true;
  const auto dofs = cell_dofs(cell_of_point(q));
  return std::find(dofs.begin(), dofs.end(), dof) != dofs.end();
}

Point EvaluationTable::point(int q) const {
  if (kind == SpaceKind::spectral) {
    Point p{0, 0, 0};
    if (dim == 2) {
      p[0] = sp.nodes_d[0][q / sp.nq1];
      p[1] = sp.nodes_d[1][q % sp.nq1];
    } else {
      p[0] = sp.nodes_d[0][q / (sp.nq1 * sp.nq1)];
      p[1] = sp.nodes_d[1][(q / sp.nq1) % sp.nq1];
      p[2] = sp.nodes_d[2][q % sp.nq1];
    }
    return p;
  }
  const int nq = fem.nq1 * fem.nq1;
  const int cell = q / nq, l = q % nq;
  const int ex = cell % fem.nx, ey = cell / fem.nx;
  return {domain.lower[0] + ex * fem.hx + fem.qx[l],
          domain.lower[1] + ey * fem.hy + fem.qy[l], 0.0};
}

double EvaluationTable::weight(int q) const {
  if (kind == SpaceKind::spectral) {
    if (dim == 2) return sp.weights_d[0][q / sp.nq1] * sp.weights_d[1][q % sp.nq1];
    return sp.weights_d[0][q / (sp.nq1 * sp.nq1)] * sp.weights_d[1][(q / sp.nq1) % sp.nq1] *
           sp.weights_d[2][q % sp.nq1];
  }
  return fem.qw[q % (fem.nq1 * fem.nq1)];
}

namespace {

inline void spectral_qsplit(const SpectralTable& sp, int dim, int q, int p[3]) {
  if (dim == 2) {
    p[0] = q / sp.nq1;
    p[1] = q % sp.nq1;
    p[2] = 0;
  } else {
    p[0] = q / (sp.nq1 * sp.nq1);
    p[1] = (q / sp.nq1) % sp.nq1;
    p[2] = q % sp.nq1;
  }
}

// derivative order per dimension -> value of one separable term factor
inline double sp_factor(const SpectralTable& sp, int fun, int p, int order, int d) {
  const int nq = sp.nq1;
  switch (order) {
    case 0: return sp.fval[fun * nq + p];
    case 1: return sp.fd1[fun * nq + p] * sp.scale[d];
    default: return sp.fd2[fun * nq + p] * sp.scale[d] * sp.scale[d];
  }
}

double sp_derivative(const SpectralTable& sp, int dim, int dof, int q, const int order[3]) {
  int p[3];
  spectral_qsplit(sp, dim, q, p);
  double sum = 0.0;
  for (const SepTerm& t : sp.basis->dof_terms[dof]) {
    double prod = t.c;
    for (int d = 0; d < dim; ++d) prod *= sp_factor(sp, t.f[d], p[d], order[d], d);
    sum += prod;
  }
  return sum;
}

int fem_local_index(const EvaluationTable& t, int dof, int cell) {
  const auto dofs = t.cell_dofs(cell);
  for (int l = 0; l < 16; ++l)
    if (dofs[l] == dof) return l;
  return -1;
}

} // namespace

double EvaluationTable::value(int dof, int q) const {
  if (kind == SpaceKind::spectral) {
    const int order[3] = {0, 0, 0};
    return sp_derivative(sp, dim, dof, q, order);
  }
  const int nq = fem.nq1 * fem.nq1;
  const int l = fem_local_index(*this, dof, q / nq);
  return l < 0 ? 0.0 : fem.val[l * nq + q % nq];
}

void EvaluationTable::gradient(int dof, int q, double g[3]) const {
  g[0] = g[1] = g[2] = 0.0;
  if (kind == SpaceKind::spectral) {
    for (int d = 0; d < dim; ++d) {
      int order[3] = {0, 0, 0};
      order[d] = 1;
      g[d] = sp_derivative(sp, dim, dof, q, order);
    }
    return;
  }
  const int nq = fem.nq1 * fem.nq1;
  const int l = fem_local_index(*this, dof, q / nq);
  if (l < 0) return;
  g[0] = fem.gx[l * nq + q % nq];
  g[1] = fem.gy[l * nq + q % nq];
}

SymMat EvaluationTable::hessian(int dof, int q) const {
  SymMat h = SymMat::zero(dim);
  if (kind == SpaceKind::spectral) {
    for (int a = 0; a < dim; ++a) {
      for (int b = a; b < dim; ++b) {
        int order[3] = {0, 0, 0};
        order[a] += 1;
        order[b] += 1;
        const double v = sp_derivative(sp, dim, dof, q, order);
        h(a, b) = v;
        h(b, a) = v;
      }
    }
    return h;
  }
  const int nq = fem.nq1 * fem.nq1;
  const int l = fem_local_index(*this, dof, q / nq);
  if (l < 0) return h;
  h(0, 0) = fem.gxx[l * nq + q % nq];
  h(1, 1) = fem.gyy[l * nq + q % nq];
  h(0, 1) = h(1, 0) = fem.gxy[l * nq + q % nq];
  return h;
}

double EvaluationTable::laplacian(int dof, int q) const { return trace(hessian(dof, q)); }

int EvaluationTable::n_face_points(int f) const {
  if (kind == SpaceKind::spectral) {
    int n = 1;
    for (int d = 0; d < dim; ++d)
      if (d != f / 2) n *= sp.nq1;
    return n;
  }
  return (f / 2 == 0 ? fem.ny : fem.nx) * fem.nq1;
}

Point EvaluationTable::face_point(int f, int q) const {
  const int nd = f / 2, side = f % 2;
  Point p{0, 0, 0};
  if (kind == SpaceKind::spectral) {
    p[nd] = side == 0 ? domain.lower[nd] : domain.upper[nd];
    int tang[2], nt = 0;
    for (int d = 0; d < dim; ++d)
      if (d != nd) tang[nt++] = d;
    if (nt == 1) {
      p[tang[0]] = sp.nodes_d[tang[0]][q];
    } else {
      p[tang[0]] = sp.nodes_d[tang[0]][q / sp.nq1];
      p[tang[1]] = sp.nodes_d[tang[1]][q % sp.nq1];
    }
    return p;
  }
  const int seg = q / fem.nq1, l = q % fem.nq1;
  if (nd == 0) {
    p[0] = side == 0 ? domain.lower[0] : domain.upper[0];
    p[1] = domain.lower[1] + seg * fem.hy + fem.face_qt[f][l];
  } else {
    p[1] = side == 0 ? domain.lower[1] : domain.upper[1];
    p[0] = domain.lower[0] + seg * fem.hx + fem.face_qt[f][l];
  }
  return p;
}

double EvaluationTable::face_weight(int f, int q) const {
  const int nd = f / 2;
  if (kind == SpaceKind::spectral) {
    int tang[2], nt = 0;
    for (int d = 0; d < dim; ++d)
      if (d != nd) tang[nt++] = d;
    if (nt == 1) return sp.weights_d[tang[0]][q];
    return sp.weights_d[tang[0]][q / sp.nq1] * sp.weights_d[tang[1]][q % sp.nq1];
  }
  return fem.face_qw[f][q % fem.nq1];
}

double EvaluationTable::normal_derivative(int dof, int f, int q) const {
  const int nd = f / 2, side = f % 2;
  if (kind == SpaceKind::spectral) {
    int tang[2], nt = 0;
    for (int d = 0; d < dim; ++d)
      if (d != nd) tang[nt++] = d;
    int pt[3] = {0, 0, 0};
    if (nt == 1) {
      pt[tang[0]] = q;
    } else {
      pt[tang[0]] = q / sp.nq1;
      pt[tang[1]] = q % sp.nq1;
    }
    const double sign = side == 0 ? -1.0 : 1.0;
    double sum = 0.0;
    for (const SepTerm& t : sp.basis->dof_terms[dof]) {
      double prod = t.c * sign * sp.ed1[t.f[nd] * 2 + side] * sp.scale[nd];
      for (int k = 0; k < nt; ++k) {
        const int d = tang[k];
        prod *= sp.fval[t.f[d] * sp.nq1 + pt[d]];
      }
      sum += prod;
    }
    return sum;
  }
  const int seg = q / fem.nq1, l = q % fem.nq1;
  const int cell = (nd == 0) ? ((f % 2 == 0 ? 0 : fem.nx - 1) + seg * fem.nx)
                             : (seg + (f % 2 == 0 ? 0 : fem.ny - 1) * fem.nx);
  const int loc = fem_local_index(*this, dof, cell);
  return loc < 0 ? 0.0 : fem.face_dn[f][loc * fem.nq1 + l];
}

// ---------------------------------------------------------------------
// Field evaluation at arbitrary points
// ---------------------------------------------------------------------

FieldSample evaluate_field_at(const FunctionSpace& space, const DofVector& coeffs,
                              const Point& p) {
  return evaluate_field(space, coeffs, std::span<const Point>(&p, 1))[0];
}

std::vector<FieldSample> evaluate_field(const FunctionSpace& space, const DofVector& coeffs,
                                        std::span<const Point> points) {
  check_space_match(space, coeffs);
  const int dim = space.dim();
  std::vector<FieldSample> out(points.size());

  if (space.kind == SpaceKind::spectral) {
    const SpectralBasis& basis = *space.sbasis;
    const int nf = basis.n_fun;
    std::vector<double> fv(nf * 3), f1(nf * 3), f2(nf * 3);
    double scale[3];
    for (int d = 0; d < dim; ++d) scale[d] = 2.0 / space.domain.length(d);

    for (size_t ip = 0; ip < points.size(); ++ip) {
      const Point& x = points[ip];
      if (!space.domain.contains(x))
        throw std::invalid_argument("evaluate_field: point outside domain");
      for (int d = 0; d < dim; ++d) {
        const double r =
            2.0 * (x[d] - space.domain.lower[d]) / space.domain.length(d) - 1.0;
        for (int f = 0; f < nf; ++f) {
          double v, d1, d2;
          eval_coef(basis.fun_coef[f], r, v, d1, d2);
          fv[f * 3 + d] = v;
          f1[f * 3 + d] = d1 * scale[d];
          f2[f * 3 + d] = d2 * scale[d] * scale[d];
        }
      }
      FieldSample s;
      s.hessian = SymMat::zero(dim);
      for (int dof = 0; dof < space.dof_count; ++dof) {
        const double c = coeffs.coeffs[dof];
        if (c == 0.0) continue;
        for (const SepTerm& t : basis.dof_terms[dof]) {
          double val[3], dd1[3], dd2[3];
          for (int d = 0; d < dim; ++d) {
            val[d] = fv[t.f[d] * 3 + d];
            dd1[d] = f1[t.f[d] * 3 + d];
            dd2[d] = f2[t.f[d] * 3 + d];
          }
          const double w = c * t.c;
          if (dim == 2) {
            s.value += w * val[0] * val[1];
            s.gradient[0] += w * dd1[0] * val[1];
            s.gradient[1] += w * val[0] * dd1[1];
            s.hessian(0, 0) += w * dd2[0] * val[1];
            s.hessian(1, 1) += w * val[0] * dd2[1];
            s.hessian(0, 1) += w * dd1[0] * dd1[1];
          } else {
            s.value += w * val[0] * val[1] * val[2];
            s.gradient[0] += w * dd1[0] * val[1] * val[2];
            s.gradient[1] += w * val[0] * dd1[1] * val[2];
            s.gradient[2] += w * val[0] * val[1] * dd1[2];
            s.hessian(0, 0) += w * dd2[0] * val[1] * val[2];
            s.hessian(1, 1) += w * val[0] * dd2[1] * val[2];
            s.hessian(2, 2) += w * val[0] * val[1] * dd2[2];
            s.hessian(0, 1) += w * dd1[0] * dd1[1] * val[2];
            s.hessian(0, 2) += w * dd1[0] * val[1] * dd1[2];
            s.hessian(1, 2) += w * val[0] * dd1[1] * dd1[2];
          }
        }
      }
      s.hessian(1, 0) = s.hessian(0, 1);
      if (dim == 3) {
        s.hessian(2, 0) = s.hessian(0, 2);
        s.hessian(2, 1) = s.hessian(1, 2);
      }
      out[ip] = s;
    }
    return out;
  }

  const double hx = space.domain.length(0) / space.nx;
  const double hy = space.domain.length(1) / space.ny;
  for (size_t ip = 0; ip < points.size(); ++ip) {
    const Point& x = points[ip];
    if (!space.domain.contains(x))
      throw std::invalid_argument("evaluate_field: point outside domain");
    int ex = std::min(space.nx - 1,
                      std::max(0, static_cast<int>((x[0] - space.domain.lower[0]) / hx)));
    int ey = std::min(space.ny - 1,
                      std::max(0, static_cast<int>((x[1] - space.domain.lower[1]) / hy)));
    const double tx = (x[0] - space.domain.lower[0] - ex * hx) / hx;
    const double ty = (x[1] - space.domain.lower[1] - ey * hy) / hy;
    double xv[4], xd[4], xdd[4], yv[4], yd[4], ydd[4];
    hermite_factors(tx, hx, xv, xd, xdd);
    hermite_factors(ty, hy, yv, yd, ydd);
    FieldSample s;
    s.hessian = SymMat::zero(2);
    for (int a = 0; a < 4; ++a) {
      const int node = (ey + ((a >> 1) & 1)) * (space.nx + 1) + (ex + (a & 1));
      for (int c = 0; c < 4; ++c) {
        const double co = coeffs.coeffs[4 * node + c];
        if (co == 0.0) continue;
        const int fx = 2 * (a & 1) + ((c == 1 || c == 3) ? 1 : 0);
        const int fy = 2 * ((a >> 1) & 1) + ((c == 2 || c == 3) ? 1 : 0);
        s.value += co * xv[fx] * yv[fy];
        s.gradient[0] += co * xd[fx] * yv[fy];
        s.gradient[1] += co * xv[fx] * yd[fy];
        s.hessian(0, 0) += co * xdd[fx] * yv[fy];
        s.hessian(1, 1) += co * xv[fx] * ydd[fy];
        s.hessian(0, 1) += co * xd[fx] * yd[fy];
      }
    }
    s.hessian(1, 0) = s.hessian(0, 1);
    out[ip] = s;
  }
  return out;
}

// ---------------------------------------------------------------------
// Boundary lift and interpolation
// ---------------------------------------------------------------------

DofVector boundary_lift(const FunctionSpace& space, const ScalarFn& g, const VectorFn& grad_g) {
  if (!g) throw std::invalid_argument("boundary_lift: g is required");
  DofVector v = zero_dof_vector(space);

  if (space.kind == SpaceKind::spectral) {
    const int ni = space.n_free();
    for (size_t b = 0; b < space.boundary_site.size(); ++b)
      v.coeffs[ni + b] = g(space.site_coords(space.boundary_site[b]));
    return v;
  }

  if (!grad_g)
    throw std::invalid_argument("boundary_lift: hermite_fem needs tangential data (grad_g)");
  for (int j = 0; j <= space.ny; ++j) {
    for (int i = 0; i <= space.nx; ++i) {
      const bool onx = (i == 0 || i == space.nx), ony = (j == 0 || j == space.ny);
      if (!onx && !ony) continue;
      const Point p = space.node_coords(i, j);
      const int base = 4 * space.node_index(i, j);
      v.coeffs[base] = g(p);
      const Point gr = grad_g(p);
      if (onx && ony) {
        v.coeffs[base + 1] = gr[0];
        v.coeffs[base + 2] = gr[1];
      } else if (onx) {
        v.coeffs[base + 2] = gr[1];
      } else {
        v.coeffs[base + 1] = gr[0];
      }
    }
  }
  return v;
}

DofVector interpolate(const FunctionSpace& space, const ScalarFn& u, const VectorFn& grad_u,
                      const MatrixFn& hess_u) {
  if (!u) throw std::invalid_argument("interpolate: u is required");

  if (space.kind == SpaceKind::hermite_fem) {
    if (!grad_u || !hess_u)
      throw std::invalid_argument("interpolate: hermite_fem needs grad and hess data");
    DofVector v = zero_dof_vector(space);
    for (int j = 0; j <= space.ny; ++j) {
      for (int i = 0; i <= space.nx; ++i) {
        const Point p = space.node_coords(i, j);
        const int base = 4 * space.node_index(i, j);
        v.coeffs[base] = u(p);
        const Point gr = grad_u(p);
        v.coeffs[base + 1] = gr[0];
        v.coeffs[base + 2] = gr[1];
        v.coeffs[base + 3] = hess_u(p)(0, 1);
      }
    }
    return v;
  }

  const int n = space.order, dim = space.dim();
  const int nc = n + 1;
  const SpectralBasis& basis = *space.sbasis;

  // Gauss projection onto Legendre coefficients (exact through degree N)
  const QuadRule1D gauss = gauss_legendre_rule(nc);
  std::vector<double> lv(static_cast<size_t>(nc) * nc); // L_k at gauss nodes
  {
    std::vector<double> tv(nc), t1(nc), t2(nc);
    for (int p = 0; p < nc; ++p) {
      legendre_all(n, gauss.nodes[p], tv.data(), t1.data(), t2.data());
      for (int k = 0; k < nc; ++k) lv[static_cast<size_t>(k) * nc + p] = tv[k];
    }
  }
  const int npts = dim == 2 ? nc * nc : nc * nc * nc;
  std::vector<double> fvals(npts);
  for (int idx = 0; idx < npts; ++idx) {
    Point p{0, 0, 0};
    int rem = idx;
    int gi[3] = {0, 0, 0};
    for (int d = dim - 1; d >= 0; --d) {
      gi[d] = rem % nc;
      rem /= nc;
    }
    for (int d = 0; d < dim; ++d)
      p[d] = space.domain.lower[d] + 0.5 * (gauss.nodes[gi[d]] + 1.0) * space.domain.length(d);
    fvals[idx] = u(p);
  }
  // contract one axis at a time: coef_k = (2k+1)/2 sum_p w_p L_k(x_p) f
  std::vector<double> cur = fvals, next;
  for (int d = 0; d < dim; ++d) {
    next.assign(cur.size(), 0.0);
    int inner = 1;
    for (int e = d + 1; e < dim; ++e) inner *= nc;
    int outer = 1;
    for (int e = 0; e < d; ++e) outer *= nc;
    for (int o = 0; o < outer; ++o) {
      for (int i = 0; i < inner; ++i) {
        for (int k = 0; k < nc; ++k) {
          double s = 0.0;
          for (int p = 0; p < nc; ++p)
            s += gauss.weights[p] * lv[static_cast<size_t>(k) * nc + p] *
                 cur[(static_cast<size_t>(o) * nc + p) * inner + i];
          next[(static_cast<size_t>(o) * nc + k) * inner + i] = s * (2.0 * k + 1.0) / 2.0;
        }
      }
    }
    cur.swap(next);
  }
  std::vector<double> legc = cur; // tensor Legendre coefficients of the projection

  // boundary part: constrained DOFs take the boundary-site values of u
  DofVector v = zero_dof_vector(space);
  const int ni = space.n_free();
  for (size_t b = 0; b < space.boundary_site.size(); ++b)
    v.coeffs[ni + b] = u(space.site_coords(space.boundary_site[b]));

  // subtract the lift's Legendre coefficients
  for (size_t b = 0; b < space.boundary_site.size(); ++b) {
    const double c = v.coeffs[ni + b];
    if (c == 0.0) continue;
    for (const SepTerm& t : basis.dof_terms[ni + b]) {
      const auto& cx = basis.fun_coef[t.f[0]];
      const auto& cy = basis.fun_coef[t.f[1]];
      if (dim == 2) {
        for (size_t a = 0; a < cx.size(); ++a)
          for (size_t bb = 0; bb < cy.size(); ++bb)
            legc[a * nc + bb] -= c * t.c * cx[a] * cy[bb];
      } else {
        const auto& cz = basis.fun_coef[t.f[2]];
        for (size_t a = 0; a < cx.size(); ++a)
          for (size_t bb = 0; bb < cy.size(); ++bb)
            for (size_t cc = 0; cc < cz.size(); ++cc)
              legc[(a * nc + bb) * nc + cc] -= c * t.c * cx[a] * cy[bb] * cz[cc];
      }
    }
  }

  // invert p_m = a_m - a_{m-2} along each axis (upward recurrence)
  for (int d = 0; d < dim; ++d) {
    int inner = 1;
    for (int e = d + 1; e < dim; ++e) inner *= nc;
    int outer = 1;
    for (int e = 0; e < d; ++e) outer *= nc;
    for (int o = 0; o < outer; ++o) {
      for (int i = 0; i < inner; ++i) {
        double am2 = 0.0, am1 = 0.0;
        for (int m = 0; m <= n - 2; ++m) {
          const size_t idx = (static_cast<size_t>(o) * nc + m) * inner + i;
          const double am = legc[idx] + am2;
          legc[idx] = am;
          am2 = am1;
          am1 = am;
        }
        // top two rows are consistency residue; zero them out
        for (int m = n - 1; m <= n; ++m)
          legc[(static_cast<size_t>(o) * nc + m) * inner + i] = 0.0;
      }
    }
  }

  // gather interior block (indices 0..N-2 per axis) into free DOFs
  const int ni1 = n - 1;
  if (dim == 2) {
    for (int i = 0; i < ni1; ++i)
      for (int j = 0; j < ni1; ++j) v.coeffs[i * ni1 + j] = legc[static_cast<size_t>(i) * nc + j];
  } else {
    for (int i = 0; i < ni1; ++i)
      for (int j = 0; j < ni1; ++j)
        for (int k = 0; k < ni1; ++k)
          v.coeffs[(i * ni1 + j) * ni1 + k] = legc[(static_cast<size_t>(i) * nc + j) * nc + k];
  }
  return v;
}

DofVector spectral_pad(const FunctionSpace& from, const FunctionSpace& to,
                       const DofVector& coeffs) {
  if (from.kind != SpaceKind::spectral || to.kind != SpaceKind::spectral)
    throw std::invalid_argument("spectral_pad: both spaces must be spectral");
  if (from.dim() != to.dim() || to.order < from.order)
    throw std::invalid_argument("spectral_pad: incompatible spaces");
  check_space_match(from, coeffs);
  DofVector out = zero_dof_vector(to);
  const int a = from.order - 1, b = to.order - 1, dim = from.dim();
  if (dim == 2) {
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j) out.coeffs[i * b + j] = coeffs.coeffs[i * a + j];
  } else {
    for (int i = 0; i < a; ++i)
      for (int j = 0; j < a; ++j)
        for (int k = 0; k < a; ++k)
          out.coeffs[(i * b + j) * b + k] = coeffs.coeffs[(i * a + j) * a + k];
  }
  return out;
}

} // namespace vmma
