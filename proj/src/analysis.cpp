#include "vmma/analysis.hpp"
#include "vmma/exec.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <stdexcept>

namespace vmma {

ExactTriple exact_triple(const ProblemSpec& p, double eps) {
  if (!p.exact) throw std::invalid_argument("exact_triple: problem has no exact solution");
  const ExactSolution& e = *p.exact;
  ExactTriple t;
  t.u = [&e, eps](const Point& x) { return e.u(x, eps); };
  t.grad = [&e, eps](const Point& x) { return e.grad(x, eps); };
  t.hess = [&e, eps](const Point& x) { return e.hess(x, eps); };
  return t;
}

Norms error_norms(const FunctionSpace& space, const DofVector& coeffs,
                  const ExactTriple* exact, int quad_order) {
  check_space_match(space, coeffs);
  const int order = quad_order > 0 ? quad_order : default_quad_order(space) + 4;
  const EvaluationTable table = tabulate(space, order);
  const FieldOnQuad fq = field_on_quad(space, table, coeffs);
  const int dim = space.dim();

  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (int q = 0; q < fq.nq; ++q) {
    const double w = table.weight(q);
    const Point x = table.point(q);
    double ev = fq.value[q];
    Point eg{fq.grad[0][q], fq.grad[1][q], dim == 3 ? fq.grad[2][q] : 0.0};
    SymMat eh = fq.hess_at(q);
    if (exact) {
      ev -= exact->u(x);
      const Point g = exact->grad(x);
      const SymMat h = exact->hess(x);
      for (int d = 0; d < dim; ++d) eg[d] -= g[d];
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) eh(a, b) -= h(a, b);
    }
    s0 += w * ev * ev;
    double g2 = 0.0;
    for (int d = 0; d < dim; ++d) g2 += eg[d] * eg[d];
    s1 += w * g2;
    double h2 = 0.0;
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) h2 += eh(a, b) * eh(a, b); // each multi-index once
    s2 += w * h2;
  }
  Norms n;
  n.l2 = std::sqrt(s0);
  n.h1 = std::sqrt(s0 + s1);
  n.h2 = std::sqrt(s0 + s1 + s2);
  return n;
}

Norms field_norms(const FunctionSpace& space, const DofVector& coeffs) {
  return error_norms(space, coeffs, nullptr);
}

RateFit rate_fit(std::span<const std::pair<double, double>> pairs, RateFit::Mode mode,
                 double fixed_alpha) {
  if (pairs.empty()) throw std::invalid_argument("rate_fit: no data");
  if (mode == RateFit::Mode::free && pairs.size() < 2)
    throw std::invalid_argument("rate_fit: free fit needs at least 2 pairs");
  for (auto [x, y] : pairs)
    if (x <= 0 || y <= 0) throw std::invalid_argument("rate_fit: data must be positive");

  const int n = static_cast<int>(pairs.size());
  double mx = 0, my = 0;
  for (auto [x, y] : pairs) {
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;

  RateFit fit;
  fit.mode = mode;
  if (mode == RateFit::Mode::free) {
    double sxx = 0, sxy = 0;
    for (auto [x, y] : pairs) {
      const double dx = std::log(x) - mx, dy = std::log(y) - my;
      sxx += dx * dx;
      sxy += dx * dy;
    }
    if (sxx == 0) throw std::invalid_argument("rate_fit: degenerate abscissae");
    fit.alpha = sxy / sxx;
    fit.beta = std::exp(my - fit.alpha * mx);
  } else {
    fit.alpha = fixed_alpha;
    fit.beta = std::exp(my - fixed_alpha * mx);
  }
  double ss = 0;
  for (auto [x, y] : pairs) {
    const double r = std::log(y) - (std::log(fit.beta) + fit.alpha * std::log(x));
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / n);
  return fit;
}

int converged_spectral_order(double eps) {
  const int n = static_cast<int>(std::ceil(4.0 / std::sqrt(eps)));
  return std::min(48, std::max(16, n));
}

std::vector<double> continuation_ladder(double target, double start) {
  if (target <= 0) throw std::invalid_argument("continuation_ladder: target must be positive");
  std::vector<double> out;
  for (double v = start; v > target * 1.0000001; v *= 0.5) out.push_back(v);
  out.push_back(target);
  return out;
}

// ---------------------------------------------------------------------
// study drivers
// ---------------------------------------------------------------------

namespace {

struct StageOutcome {
  SolveResult result;
  double seconds = 0.0;
};

// warm-started Newton stages over a decreasing eps ladder; the first
// stage seeds from the convex-seed linear solve unless `warm` is given
std::vector<std::pair<double, StageOutcome>> staged_cascade(
    const ProblemSpec& p, const FunctionSpace& space, const std::vector<double>& ladder,
    const SolverOptions& opts, const DofVector* warm) {
  const int order = opts.quad_order > 0 ? opts.quad_order : default_quad_order(space);
  const EvaluationTable table = tabulate(space, order);
  const DofVector lift = boundary_lift(space, p.g, p.grad_g);

  std::vector<std::pair<double, StageOutcome>> out;
  DofVector u;
  if (warm) {
    u = *warm;
  } else {
    try {
      u = convex_seed(p, space, table, ladder.front());
    } catch (const SingularMatrixError& e) {
      throw SolverFailure(std::string("study: seed solve failed (") + e.what() + ")", 0);
    }
  }
  SolverOptions stage_opts = opts;
  stage_opts.quad_order = order;
  for (double eps : ladder) {
    for (int d : space.constrained_dofs) u.coeffs[d] = lift.coeffs[d];
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r;
    // run with the shared table via the public entry; the table rebuild
    // in newton_solve is cheap relative to a stage
    r = newton_solve(p, space, eps, u, stage_opts);
    const auto t1 = std::chrono::steady_clock::now();
    StageOutcome st;
    st.seconds = std::chrono::duration<double>(t1 - t0).count();
    const bool ok = r.converged;
    u = r.coeffs;
    st.result = std::move(r);
    out.emplace_back(eps, std::move(st));
    if (!ok) break;
  }
  return out;
}

ConvergenceRecord make_record(const StudyPlan& plan, const ProblemSpec& p,
                              const FunctionSpace& space, double eps, const SolveResult& sr,
                              double seconds) {
  ConvergenceRecord rec;
  rec.study = plan.kind == StudyKind::test1   ? "test1"
              : plan.kind == StudyKind::test2 ? "test2"
                                              : "test3";
  rec.problem = p.id;
  rec.disc = space.kind;
  rec.epsilon = eps;
  rec.h = space.h;
  rec.order = space.kind == SpaceKind::spectral ? space.order : space.nx;
  rec.dofs = space.dof_count;
  rec.newton_iters = sr.iterations;
  rec.converged = sr.converged;
  rec.min_hessian_eig = sr.min_hessian_eig;
  rec.wall_time_s = seconds;
  if (sr.converged) {
    const ExactTriple ex = exact_triple(p, eps);
    const Norms n = error_norms(space, sr.coeffs, &ex);
    rec.err_l2 = n.l2;
    rec.err_h1 = n.h1;
    rec.err_h2 = n.h2;
    rec.ratio_l2 = n.l2 / eps;
    rec.ratio_h1 = n.h1 / std::sqrt(eps);
    rec.ratio_h2 = n.h2 / std::pow(eps, 0.25);
  }
  return rec;
}

void validate_plan(const StudyPlan& plan, const ProblemSpec& p) {
  if (plan.eps_list.empty())
    throw std::invalid_argument("study plan: eps list must not be empty");
  for (size_t i = 0; i < plan.eps_list.size(); ++i) {
    if (plan.eps_list[i] <= 0 ||
        (i > 0 && plan.eps_list[i] >= plan.eps_list[i - 1]))
      throw std::invalid_argument("study plan: eps must be positive, strictly decreasing");
  }
  switch (plan.kind) {
    case StudyKind::test1:
      if (p.exact_kind != ExactKind::solves_limit_problem)
        throw std::invalid_argument("test1 needs a problem with exact limit solution u0");
      if (plan.auto_resolution) {
        if (plan.disc != SpaceKind::spectral)
          throw std::invalid_argument("auto resolution is a spectral rule");
      } else if (plan.resolutions.size() != 1) {
        throw std::invalid_argument("test1 needs a single fixed resolution (or auto)");
      }
      if (plan.gamma != 0)
        throw std::invalid_argument("gamma only applies to test3 plans");
      break;
    case StudyKind::test2:
      if (p.exact_kind != ExactKind::solves_regularized_problem)
        throw std::invalid_argument("test2 needs a manufactured exact solution u^eps");
      if (plan.eps_list.size() != 1)
        throw std::invalid_argument("test2 fixes a single eps");
      if (plan.resolutions.size() < 1 ||
          !std::is_sorted(plan.resolutions.begin(), plan.resolutions.end()))
        throw std::invalid_argument("test2 needs an increasing resolution ladder");
      if (plan.gamma != 0)
        throw std::invalid_argument("gamma only applies to test3 plans");
      break;
    case StudyKind::test3:
      if (p.exact_kind != ExactKind::solves_limit_problem)
        throw std::invalid_argument("test3 needs a problem with exact limit solution u0");
      if (plan.gamma != 1.0 && plan.gamma != 0.5)
        throw std::invalid_argument("test3 coupling gamma must be 1 or 1/2");
      if (!plan.resolutions.empty())
        throw std::invalid_argument("test3 resolutions are derived from eps and gamma");
      break;
  }
}

FunctionSpace make_space(const StudyPlan& plan, const ProblemSpec& p, int res) {
  if (plan.disc == SpaceKind::spectral) return build_space(SpaceKind::spectral, p.domain, res);
  return build_space(SpaceKind::hermite_fem, p.domain, res, res);
}

std::vector<StudyPointDetail> run_test1(const StudyPlan& plan, const ProblemSpec& p) {
  // bootstrap eps values ahead of the requested list keep the first
  // Newton stages inside the basin of the convex seed
  static const double kBootstrap[] = {0.75, 0.5, 0.25, 0.1};
  std::vector<StudyPointDetail> out;

  std::vector<int> orders(plan.eps_list.size());
  for (size_t i = 0; i < plan.eps_list.size(); ++i)
    orders[i] = plan.auto_resolution ? converged_spectral_order(plan.eps_list[i])
                                     : plan.resolutions[0];

  size_t i = 0;
  DofVector carry;
  FunctionSpace prev_space;
  bool have_carry = false;
  bool aborted = false;
  while (i < plan.eps_list.size()) {
    size_t j = i;
    while (j < plan.eps_list.size() && orders[j] == orders[i]) ++j;
    const FunctionSpace space = make_space(plan, p, orders[i]);

    std::vector<double> ladder;
    if (!have_carry)
      for (double b : kBootstrap)
        if (b > plan.eps_list[i] * 1.0000001) ladder.push_back(b);
    ladder.insert(ladder.end(), plan.eps_list.begin() + i, plan.eps_list.begin() + j);

    DofVector warm;
    if (have_carry) warm = spectral_pad(prev_space, space, carry);
    const auto stages =
        staged_cascade(p, space, ladder, plan.opts, have_carry ? &warm : nullptr);

    const size_t skip = ladder.size() - (j - i); // bootstrap stages, first group only
    for (size_t s = 0; s < stages.size(); ++s) {
      if (s < skip) continue;
      const auto& [eps, st] = stages[s];
      StudyPointDetail d;
      d.rec = make_record(plan, p, space, eps, st.result, st.seconds);
      d.space = space;
      d.coeffs = st.result.coeffs;
      out.push_back(std::move(d));
      if (!st.result.converged) {
        aborted = true;
        break;
      }
    }
    if (aborted || stages.empty() || !stages.back().second.result.converged) break;
    carry = stages.back().second.result.coeffs;
    prev_space = space;
    have_carry = true;
    i = j;
  }
  return out;
}

StudyPointDetail run_fixed_eps_point(const StudyPlan& plan, const ProblemSpec& p, int res,
                                     double eps) {
  const FunctionSpace space = make_space(plan, p, res);
  const std::vector<double> ladder = continuation_ladder(eps);
  const auto stages = staged_cascade(p, space, ladder, plan.opts, nullptr);
  StudyPointDetail d;
  d.space = space;
  if (!stages.empty() && stages.back().first == eps) {
    const auto& st = stages.back().second;
    double total = 0.0;
    for (const auto& s : stages) total += s.second.seconds;
    d.rec = make_record(plan, p, space, eps, st.result, total);
    d.coeffs = st.result.coeffs;
  } else {
    // continuation died before reaching the target: report the point as
    // non-converged data rather than throwing
    SolveResult failed;
    failed.coeffs = boundary_lift(space, p.g, p.grad_g);
    double total = 0.0;
    for (const auto& s : stages) total += s.second.seconds;
    d.rec = make_record(plan, p, space, eps, failed, total);
    d.coeffs = failed.coeffs;
  }
  return d;
}

std::vector<StudyPointDetail> run_points(const StudyPlan& plan, const ProblemSpec& p,
                                         const std::vector<std::pair<int, double>>& points) {
  std::vector<StudyPointDetail> out(points.size());
  if (plan.jobs > 1) {
    std::vector<std::future<StudyPointDetail>> futs;
    futs.reserve(points.size());
    for (auto [res, eps] : points)
      futs.push_back(std::async(std::launch::async, run_fixed_eps_point, std::cref(plan),
                                std::cref(p), res, eps));
    for (size_t i = 0; i < futs.size(); ++i) out[i] = futs[i].get();
  } else {
    for (size_t i = 0; i < points.size(); ++i)
      out[i] = run_fixed_eps_point(plan, p, points[i].first, points[i].second);
  }
  return out;
}

} // namespace

std::vector<StudyPointDetail> run_study_detailed(const StudyPlan& plan, const ProblemSpec& p) {
  validate_plan(plan, p);
  if (plan.kind == StudyKind::test1) return run_test1(plan, p);

  std::vector<std::pair<int, double>> points;
  if (plan.kind == StudyKind::test2) {
    for (int res : plan.resolutions) points.emplace_back(res, plan.eps_list[0]);
  } else {
    for (double eps : plan.eps_list) {
      const int res = std::max(plan.disc == SpaceKind::spectral ? 2 : 1,
                               static_cast<int>(std::lround(std::pow(eps, -plan.gamma))));
      points.emplace_back(res, eps);
    }
  }
  return run_points(plan, p, points);
}

std::vector<ConvergenceRecord> run_study(const StudyPlan& plan, const ProblemSpec& p) {
  std::vector<ConvergenceRecord> recs;
  for (auto& d : run_study_detailed(plan, p)) recs.push_back(d.rec);
  return recs;
}

} // namespace vmma
