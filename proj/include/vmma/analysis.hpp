#pragma once

#include "vmma/nonlinear_solver.hpp"

#include <optional>
#include <string>
#include <vector>

// Error norms against exact solutions, power-law rate fitting, and the
// convergence-study drivers:
//   test1: fixed resolution, decreasing eps; errors against u0
//   test2: fixed eps, refinement ladder; errors against u^eps
//   test3: coupled h = eps^gamma; errors against u0
// Full Sobolev norms throughout: ||v||_k^2 = sum_{|alpha|<=k} ||D^alpha v||^2
// with each multi-index counted once.

namespace vmma {

struct Norms {
  double l2 = 0.0, h1 = 0.0, h2 = 0.0;
};

struct ExactTriple {
  ScalarFn u;
  VectorFn grad;
  MatrixFn hess;
};

// exact triple of a problem's exact solution at a given eps
ExactTriple exact_triple(const ProblemSpec& p, double eps);

// L2/H1/H2 norms of (field - exact), integrated with `extra` quadrature
// points per direction beyond the assembly default. Pass exact = nullptr
// for the norms of the field itself.
Norms error_norms(const FunctionSpace& space, const DofVector& coeffs,
                  const ExactTriple* exact, int quad_order = 0);
Norms field_norms(const FunctionSpace& space, const DofVector& coeffs);

struct RateFit {
  enum class Mode { free, fixed_alpha };
  Mode mode = Mode::free;
  double alpha = 0.0;
  double beta = 0.0;
  double residual = 0.0; // RMS deviation in log space
};

RateFit rate_fit(std::span<const std::pair<double, double>> pairs, RateFit::Mode mode,
                 double fixed_alpha = 0.0);

struct ConvergenceRecord {
  std::string study;
  std::string problem;
  SpaceKind disc = SpaceKind::spectral;
  double epsilon = 0.0;
  double h = 0.0;
  int order = 0; // spectral N, or mesh count per direction for fem
  int dofs = 0;
  int newton_iters = 0;
  bool converged = false;
  double err_l2 = 0.0, err_h1 = 0.0, err_h2 = 0.0;
  double ratio_l2 = 0.0, ratio_h1 = 0.0, ratio_h2 = 0.0; // err / eps^{1, 1/2, 1/4}
  double min_hessian_eig = 0.0;
  double wall_time_s = 0.0;
};

enum class StudyKind { test1, test2, test3 };

struct StudyPlan {
  StudyKind kind = StudyKind::test1;
  std::string problem_id;
  SpaceKind disc = SpaceKind::spectral;
  // test1: one entry (fixed resolution) or empty with auto_resolution;
  // test2: refinement ladder; test3: derived from eps and gamma
  std::vector<int> resolutions;
  bool auto_resolution = false;
  std::vector<double> eps_list; // strictly decreasing, positive
  double gamma = 0.0;           // test3 coupling h = eps^gamma
  SolverOptions opts;
  int jobs = 1;
};

struct StudyPointDetail {
  ConvergenceRecord rec;
  FunctionSpace space;
  DofVector coeffs;
};

std::vector<ConvergenceRecord> run_study(const StudyPlan& plan, const ProblemSpec& p);
std::vector<StudyPointDetail> run_study_detailed(const StudyPlan& plan, const ProblemSpec& p);

// resolution rule for test1 at "converged resolution":
// N = max(16, ceil(4/sqrt(eps))) capped at 48
int converged_spectral_order(double eps);

// halving ladder from `start` down to `target` (inclusive), used to
// continue fixed-eps solves into the Newton basin
std::vector<double> continuation_ladder(double target, double start = 0.5);

} // namespace vmma
