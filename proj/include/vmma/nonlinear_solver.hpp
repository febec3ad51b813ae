#pragma once

#include "vmma/assembly.hpp"
#include "vmma/linear_solver.hpp"

#include <stdexcept>
#include <utility>
#include <vector>

// Newton iteration for the discrete regularized Monge-Ampere problem.
// The Newton step solves B(u) * delta = R(u) and updates u += delta on
// the free DOFs: integration by parts against test functions in V_0
// turns the Jacobian into -B, and B is the symmetric form that admits
// the coercivity diagnostics. Constrained DOFs never change during a
// solve.

namespace vmma {

class SolverFailure : public std::runtime_error {
public:
  int iteration;
  SolverFailure(const std::string& what, int iter)
      : std::runtime_error(what), iteration(iter) {}
};

struct SolverOptions {
  double newton_tol = 1e-10; // residual max-norm threshold
  int max_iters = 50;
  bool damping = true; // halving line search on residual increase
  int max_halvings = 20;
  int quad_order = 0; // 0 = default for the space
};

struct SolveResult {
  DofVector coeffs;
  int iterations = 0; // residual evaluations (>= accepted updates)
  std::vector<double> residual_history;
  bool converged = false;
  double min_hessian_eig = 0.0;
  int linear_solves = 0;
};

SolveResult newton_solve(const ProblemSpec& p, const FunctionSpace& space, double eps,
                         const DofVector& initial, const SolverOptions& opts = {});

// Continuation over a strictly decreasing list of eps values. The first
// stage starts from the convex-seed linear solve; later stages warm
// start from the previous solution (boundary DOFs re-lifted). A stage
// that fails to converge aborts the remaining tail; completed stages
// are still reported.
std::vector<std::pair<double, SolveResult>> epsilon_cascade(const ProblemSpec& p,
                                                            const FunctionSpace& space,
                                                            const std::vector<double>& eps_list,
                                                            const SolverOptions& opts = {});

// Initial guess for the largest eps: solve the linearization frozen at
// the convex seed |x|^2/2 (Phi = I) with the boundary lift of g.
DofVector convex_seed(const ProblemSpec& p, const FunctionSpace& space,
                      const EvaluationTable& table, double eps);

enum class PhiMode { frozen, quasi };

// One application of the fixed-point map: T(w) = w - z with
// B z = -R(w), B built with Phi at reference_u ("frozen") or at w
// ("quasi"). T(w) keeps w's boundary DOFs.
DofVector fixed_point_step(const FunctionSpace& space, const EvaluationTable& table, double eps,
                           const DofVector& reference_u, const DofVector& w,
                           const ProblemSpec& p, PhiMode mode = PhiMode::frozen);

struct ConvexityReport {
  double min_eigenvalue = 0.0;
  Point location{0, 0, 0};
};

// Smallest eigenvalue of the discrete Hessian over an m^dim interior
// sample grid (closed form in 2-D, cyclic Jacobi in 3-D).
ConvexityReport convexity_diagnostic(const FunctionSpace& space, const DofVector& coeffs,
                                     int m);

} // namespace vmma
