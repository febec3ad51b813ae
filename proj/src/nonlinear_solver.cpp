#include "vmma/nonlinear_solver.hpp"

#include <algorithm>
#include <cmath>

namespace vmma {

namespace {

double max_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

Factorization factor_op(const AssembledOperator& op) {
  return op.is_dense ? factor(op.dense) : factor(op.csr);
}

SolveResult newton_solve_with_table(const ProblemSpec& p, const FunctionSpace& space,
                                    const EvaluationTable& table, double eps,
                                    const DofVector& initial, const SolverOptions& opts) {
  check_space_match(space, initial);
  if (opts.newton_tol <= 0 || opts.max_iters < 1)
    throw std::invalid_argument("newton_solve: bad solver options");

  SolveResult res;
  res.coeffs = initial;
  DofVector& u = res.coeffs;
  const int nfree = space.n_free();

  std::vector<double> r = assemble_residual(space, table, p, eps, u);
  double rnorm = max_norm(r);

  for (int it = 1; it <= opts.max_iters; ++it) {
    res.iterations = it;
    res.residual_history.push_back(rnorm);
    if (rnorm <= opts.newton_tol) {
      res.converged = true;
      break;
    }
    AssembledOperator b = assemble_B_form(space, table, eps, u);
    Factorization fac;
    try {
      fac = factor_op(b);
    } catch (const SingularMatrixError& e) {
      throw SolverFailure(std::string("newton_solve: singular system (") + e.what() + ")", it);
    }
    const std::vector<double> delta = solve(fac, r);
    res.linear_solves += 1;

    double alpha = 1.0;
    DofVector trial = u;
    std::vector<double> rt;
    double rtnorm = 0.0;
    for (int halve = 0;; ++halve) {
      for (int k = 0; k < nfree; ++k)
        trial.coeffs[space.free_dofs[k]] = u.coeffs[space.free_dofs[k]] + alpha * delta[k];
      rt = assemble_residual(space, table, p, eps, trial);
      rtnorm = max_norm(rt);
      if (!opts.damping || rtnorm <= rnorm || halve >= opts.max_halvings) break;
      alpha *= 0.5;
    }
    u = trial;
    r = std::move(rt);
    rnorm = rtnorm;
  }

  if (!res.converged) {
    // record the final residual for non-converged runs
    if (res.residual_history.empty() || res.residual_history.back() != rnorm)
      res.residual_history.push_back(rnorm);
  }
  res.min_hessian_eig = convexity_diagnostic(space, u, 11).min_eigenvalue;
  return res;
}

} // namespace

DofVector convex_seed(const ProblemSpec& p, const FunctionSpace& space,
                      const EvaluationTable& table, double eps) {
  DofVector u = boundary_lift(space, p.g, p.grad_g);

  // rhs[v] = (f, v) - eps<q, dv/dnu> - eps(Lap lift, Lap v) - (D lift, Dv)
  const FieldOnQuad lift = field_on_quad(space, table, u);
  const int nq = table.n_points();
  LinearFormSpec spec;
  spec.c_val.resize(nq);
  spec.c_lap.resize(nq);
  for (int d = 0; d < space.dim(); ++d) spec.c_grad[d].resize(nq);
  for (int q = 0; q < nq; ++q) {
    spec.c_val[q] = p.f(table.point(q), eps);
    spec.c_lap[q] = -eps * lift.lap_at(q);
    for (int d = 0; d < space.dim(); ++d) spec.c_grad[d][q] = -lift.grad[d][q];
  }
  spec.c_face.resize(table.n_faces());
  for (int f = 0; f < table.n_faces(); ++f) {
    const int nfp = table.n_face_points(f);
    spec.c_face[f].resize(nfp);
    for (int q = 0; q < nfp; ++q)
      spec.c_face[f][q] = -eps * p.q_value(table.face_point(f, q), eps);
  }
  const std::vector<double> rhs = assemble_linear_form(space, table, spec);

  const AssembledOperator s = assemble_B_form_identity(space, table, eps);
  const Factorization fac = factor_op(s); // SingularMatrixError propagates
  const std::vector<double> x = solve(fac, rhs);
  for (int k = 0; k < space.n_free(); ++k) u.coeffs[space.free_dofs[k]] = x[k];
  return u;
}

SolveResult newton_solve(const ProblemSpec& p, const FunctionSpace& space, double eps,
                         const DofVector& initial, const SolverOptions& opts) {
  const int order = opts.quad_order > 0 ? opts.quad_order : default_quad_order(space);
  const EvaluationTable table = tabulate(space, order);
  return newton_solve_with_table(p, space, table, eps, initial, opts);
}

std::vector<std::pair<double, SolveResult>> epsilon_cascade(const ProblemSpec& p,
                                                            const FunctionSpace& space,
                                                            const std::vector<double>& eps_list,
                                                            const SolverOptions& opts) {
  if (eps_list.empty()) throw std::invalid_argument("epsilon_cascade: empty eps list");
  for (size_t i = 0; i < eps_list.size(); ++i) {
    if (eps_list[i] <= 0 || (i > 0 && eps_list[i] >= eps_list[i - 1]))
      throw std::invalid_argument("epsilon_cascade: eps must be positive, strictly decreasing");
  }
  const int order = opts.quad_order > 0 ? opts.quad_order : default_quad_order(space);
  const EvaluationTable table = tabulate(space, order);

  std::vector<std::pair<double, SolveResult>> out;
  DofVector u;
  try {
    u = convex_seed(p, space, table, eps_list[0]);
  } catch (const SingularMatrixError& e) {
    throw SolverFailure(std::string("epsilon_cascade: seed solve failed (") + e.what() + ")", 0);
  }
  const DofVector lift = boundary_lift(space, p.g, p.grad_g);
  for (double eps : eps_list) {
    // re-lift the boundary data (q may vary with eps; g is re-evaluated)
    for (int d : space.constrained_dofs) u.coeffs[d] = lift.coeffs[d];
    SolveResult r = newton_solve_with_table(p, space, table, eps, u, opts);
    const bool ok = r.converged;
    u = r.coeffs;
    out.emplace_back(eps, std::move(r));
    if (!ok) break; // abort the tail; completed stages stand
  }
  return out;
}

DofVector fixed_point_step(const FunctionSpace& space, const EvaluationTable& table, double eps,
                           const DofVector& reference_u, const DofVector& w,
                           const ProblemSpec& p, PhiMode mode) {
  check_space_match(space, reference_u);
  check_space_match(space, w);
  const DofVector& phi_state = (mode == PhiMode::frozen) ? reference_u : w;
  AssembledOperator b = assemble_B_form(space, table, eps, phi_state);
  Factorization fac;
  try {
    fac = factor_op(b);
  } catch (const SingularMatrixError& e) {
    throw SolverFailure(std::string("fixed_point_step: B factorization failed (") + e.what() +
                            ")",
                        0);
  }
  std::vector<double> rhs = assemble_residual(space, table, p, eps, w);
  for (double& v : rhs) v = -v; // B z = rhs of (4.1), i.e. -R(w)
  const std::vector<double> z = solve(fac, rhs);
  DofVector t = w;
  for (int k = 0; k < space.n_free(); ++k) t.coeffs[space.free_dofs[k]] -= z[k];
  return t;
}

ConvexityReport convexity_diagnostic(const FunctionSpace& space, const DofVector& coeffs,
                                     int m) {
  if (m < 2) throw std::invalid_argument("convexity_diagnostic: m must be >= 2");
  const std::vector<Point> grid = interior_grid(space.domain, m);
  const std::vector<FieldSample> samples = evaluate_field(space, coeffs, grid);
  ConvexityReport rep;
  rep.min_eigenvalue = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < grid.size(); ++i) {
    const double ev = min_eigenvalue(samples[i].hessian);
    if (ev < rep.min_eigenvalue) {
      rep.min_eigenvalue = ev;
      rep.location = grid[i];
    }
  }
  return rep;
}

} // namespace vmma
