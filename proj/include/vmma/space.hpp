#pragma once

#include "vmma/hessian.hpp"
#include "vmma/quadrature.hpp"

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

// C1-conforming discrete spaces on box domains:
//
//  * spectral: tensor-product polynomials of degree N per direction
//    (2-D and 3-D). Interior (free) functions are tensor products of
//    eta_k = L_k - L_{k+2}, which vanish at interval endpoints; the
//    constrained functions are transfinite-blending cardinals of the
//    Gauss-Lobatto boundary sites, so setting the constrained
//    coefficients to boundary values of g produces the transfinite
//    interpolation lift directly.
//
//  * hermite_fem: bicubic Hermite rectangles (2-D), nodal DOFs
//    {u, u_x, u_y, u_xy}. Dirichlet data constrains the value and the
//    tangential first derivatives on the boundary (both at corners);
//    u_xy stays free everywhere.
//
// DOF ordering is fixed:
//   spectral: interior DOFs first, lexicographic in the Shen indices
//     (i major), then boundary sites lexicographic in grid coordinates.
//   hermite_fem: node-major with nodes ordered row by row (y outer,
//     x inner), per node [value, d/dx, d/dy, d2/dxdy].

namespace vmma {

using Point = std::array<double, 3>;

struct BoxDomain {
  int dim = 2;
  Point lower{0.0, 0.0, 0.0};
  Point upper{1.0, 1.0, 1.0};

  double length(int d) const { return upper[d] - lower[d]; }
  double volume() const {
    double v = 1.0;
    for (int d = 0; d < dim; ++d) v *= length(d);
    return v;
  }
  bool contains(const Point& p, double tol = 1e-12) const;
  void validate() const; // lower[i] < upper[i]
};

enum class SpaceKind { spectral, hermite_fem };

const char* to_string(SpaceKind k);

struct FunctionSpace {
  SpaceKind kind = SpaceKind::spectral;
  BoxDomain domain;
  int order = 0;      // spectral polynomial degree N per direction
  int nx = 0, ny = 0; // hermite_fem mesh counts
  double h = 0.0;     // 1/N (spectral) or element edge length (fem)

  int dof_count = 0;
  std::vector<int> free_dofs, constrained_dofs;
  std::vector<int> free_index; // dof -> index into free_dofs, or -1

  std::string id;

  // spectral bookkeeping
  std::vector<double> lobatto;                   // N+1 sites on [-1,1]
  std::vector<std::array<int, 3>> boundary_site; // grid coords per constrained dof
  std::shared_ptr<const struct SpectralBasis> sbasis;

  int n_free() const { return static_cast<int>(free_dofs.size()); }
  int dim() const { return domain.dim; }
  // fem node/dof helpers
  int node_index(int i, int j) const { return j * (nx + 1) + i; }
  Point node_coords(int i, int j) const;
  Point site_coords(const std::array<int, 3>& g) const; // spectral lobatto grid point
};

FunctionSpace build_space(SpaceKind kind, const BoxDomain& domain, int order_or_nx,
                          int ny = -1);

struct DofVector {
  std::string space_id;
  std::vector<double> coeffs;
};

DofVector zero_dof_vector(const FunctionSpace& space);

// ---------------------------------------------------------------------
// Evaluation tables
// ---------------------------------------------------------------------

// One separable factor product: c * f_{f[0]}(x) * f_{f[1]}(y) [* f_{f[2]}(z)]
struct SepTerm {
  double c = 1.0;
  std::array<int, 3> f{0, 0, 0};
};

// 1-D function inventory of a spectral space (shared across directions,
// reference coordinates), each stored by its Legendre coefficients:
//   0..N-2         eta_k = L_k - L_{k+2}
//   N-1..2N-1      Lagrange cardinals of the N+1 Lobatto sites
//   2N, 2N+1       linear blends (1-t)/2, (1+t)/2
//   2N+2           constant 1
// plus, per DOF, its expansion as a short sum of separable products.
struct SpectralBasis {
  int n = 0;
  int dim = 2;
  int n_fun = 0;
  std::vector<std::vector<double>> fun_coef;
  std::vector<std::vector<SepTerm>> dof_terms;

  int shen(int k) const { return k; }
  int cardinal(int m) const { return (n - 1) + m; }
  int blend(int side) const { return 2 * n + side; }
  int one() const { return 2 * n + 2; }
};

struct SpectralTable {
  std::shared_ptr<const SpectralBasis> basis;
  int n = 0;   // polynomial degree N
  int dim = 2;
  int nq1 = 0; // quadrature points per direction
  QuadRule1D ref_rule;

  // basis functions tabulated at the reference quadrature nodes,
  // [fun * nq1 + p], reference-coordinate derivatives
  std::vector<double> fval, fd1, fd2;
  // endpoint values at -1 (side 0) and +1 (side 1), [fun * 2 + side]
  std::vector<double> eval, ed1, ed2;

  std::array<std::vector<double>, 3> nodes_d;   // mapped nodes per direction
  std::array<std::vector<double>, 3> weights_d; // mapped weights per direction
  std::array<double, 3> scale{0, 0, 0};         // 2 / L_d (chain factor)
};

struct FemTable {
  int nx = 0, ny = 0;
  int nq1 = 0;
  double hx = 0, hy = 0;
  // reference-element tables with physical scaling baked in,
  // [local dof (16)][local qp (nq1*nq1)]
  std::vector<double> val, gx, gy, gxx, gxy, gyy;
  std::vector<double> qx, qy, qw; // local qp offsets within an element + weight
  // boundary traces: for each box side, [local dof][edge qp (nq1)]
  std::array<std::vector<double>, 4> face_dn;
  std::array<std::vector<double>, 4> face_qt; // tangential offset within the edge
  std::array<std::vector<double>, 4> face_qw;
  // free-DOF CSR pattern (symbolic, from mesh connectivity) and the
  // per-cell scatter map: [cell*256 + a*16 + b] -> value slot, or -1
  std::vector<int> csr_row_ptr, csr_col;
  std::vector<int> scatter;
  std::vector<int> cell_free; // [cell*16 + a] -> free index or -1
};

// Quadrature grid plus basis values/derivatives over it, and boundary
// normal-derivative traces. Immutable after construction.
struct EvaluationTable {
  SpaceKind kind = SpaceKind::spectral;
  int dim = 2;
  int quad_order = 0;
  std::string space_id;
  BoxDomain domain;

  SpectralTable sp;
  FemTable fem;

  int n_points() const;
  Point point(int q) const;
  double weight(int q) const;

  double value(int dof, int q) const;
  void gradient(int dof, int q, double g[3]) const;
  SymMat hessian(int dof, int q) const;
  double laplacian(int dof, int q) const;

  // faces are numbered 2*d + side (side 0 = lower, 1 = upper)
  int n_faces() const { return 2 * dim; }
  int n_face_points(int f) const;
  Point face_point(int f, int q) const;
  double face_weight(int f, int q) const;
  double normal_derivative(int dof, int f, int q) const;

  // fem topology; spectral behaves as a single cell
  int n_cells() const;
  std::vector<int> cell_dofs(int cell) const;
  int cell_of_point(int q) const;
  bool supported(int dof, int q) const;
};

EvaluationTable tabulate(const FunctionSpace& space, int quad_points_per_direction);
int default_quad_order(const FunctionSpace& space);

// ---------------------------------------------------------------------
// Field evaluation, lifting, interpolation
// ---------------------------------------------------------------------

struct FieldSample {
  double value = 0.0;
  Point gradient{0, 0, 0};
  SymMat hessian;
};

std::vector<FieldSample> evaluate_field(const FunctionSpace& space, const DofVector& coeffs,
                                        std::span<const Point> points);
FieldSample evaluate_field_at(const FunctionSpace& space, const DofVector& coeffs,
                              const Point& p);

using ScalarFn = std::function<double(const Point&)>;
using VectorFn = std::function<Point(const Point&)>;
using MatrixFn = std::function<SymMat(const Point&)>;

// Encodes Dirichlet data into the constrained DOFs; free DOFs are zero.
// hermite_fem requires the tangential derivative data (grad_g).
DofVector boundary_lift(const FunctionSpace& space, const ScalarFn& g,
                        const VectorFn& grad_g = nullptr);

// Interpolation into the space. spectral uses Gauss projection (exact
// for polynomials of tensor degree <= N); hermite_fem uses nodal data
// and needs grad/hess for the derivative DOFs.
DofVector interpolate(const FunctionSpace& space, const ScalarFn& u,
                      const VectorFn& grad_u = nullptr, const MatrixFn& hess_u = nullptr);

// Zero-padded embedding of the interior coefficients of `from` into a
// higher-order spectral space; constrained DOFs are left zero.
DofVector spectral_pad(const FunctionSpace& from, const FunctionSpace& to,
                       const DofVector& coeffs);

void check_space_match(const FunctionSpace& space, const DofVector& v);
void check_space_match(const FunctionSpace& space, const EvaluationTable& t);

} // namespace vmma
