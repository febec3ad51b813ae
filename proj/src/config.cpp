#include "vmma/config.hpp"
#include "vmma/solution_io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace vmma {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s, const std::string& key, int line) {
  try {
    size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ConfigError("malformed number for '" + key + "': " + s, line);
  }
}

int parse_int(const std::string& s, const std::string& key, int line) {
  try {
    size_t pos = 0;
    const int v = std::stoi(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (...) {
    throw ConfigError("malformed integer for '" + key + "': " + s, line);
  }
}

bool parse_bool(const std::string& s, const std::string& key, int line) {
  if (s == "true" || s == "on" || s == "1") return true;
  if (s == "false" || s == "off" || s == "0") return false;
  throw ConfigError("malformed boolean for '" + key + "': " + s, line);
}

} // namespace

void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value,
                    int line) {
  StudyPlan& plan = cfg.plan;
  if (key == "study") {
    if (value == "test1") plan.kind = StudyKind::test1;
    else if (value == "test2") plan.kind = StudyKind::test2;
    else if (value == "test3") plan.kind = StudyKind::test3;
    else throw ConfigError("unknown study '" + value + "'", line);
    cfg.have_study = true;
  } else if (key == "problem") {
    plan.problem_id = value;
    cfg.have_problem = true;
  } else if (key == "disc") {
    if (value == "spectral") plan.disc = SpaceKind::spectral;
    else if (value == "hermite_fem" || value == "fem") plan.disc = SpaceKind::hermite_fem;
    else throw ConfigError("unknown discretization '" + value + "'", line);
  } else if (key == "N") {
    plan.resolutions.clear();
    plan.auto_resolution = false;
    if (value == "auto") {
      plan.auto_resolution = true;
    } else {
      for (const auto& item : split_list(value))
        plan.resolutions.push_back(parse_int(item, key, line));
    }
    plan.disc = SpaceKind::spectral;
  } else if (key == "mesh") {
    plan.resolutions.clear();
    plan.auto_resolution = false;
    for (const auto& item : split_list(value))
      plan.resolutions.push_back(parse_int(item, key, line));
    plan.disc = SpaceKind::hermite_fem;
  } else if (key == "eps") {
    plan.eps_list.clear();
    for (const auto& item : split_list(value))
      plan.eps_list.push_back(parse_double(item, key, line));
    cfg.have_eps = true;
  } else if (key == "gamma") {
    plan.gamma = parse_double(value, key, line);
  } else if (key == "newton_tol") {
    plan.opts.newton_tol = parse_double(value, key, line);
  } else if (key == "max_iters") {
    plan.opts.max_iters = parse_int(value, key, line);
  } else if (key == "damping") {
    plan.opts.damping = parse_bool(value, key, line);
  } else if (key == "jobs") {
    plan.jobs = parse_int(value, key, line);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "strict") {
    cfg.strict = parse_bool(value, key, line);
  } else if (key == "dump_solutions") {
    cfg.dump_solutions = parse_bool(value, key, line);
  } else {
    throw ConfigError("unknown key '" + key + "'", line);
  }
}

void validate_config(const RunConfig& cfg, int line) {
  const StudyPlan& plan = cfg.plan;
  if (!cfg.have_study) throw ConfigError("missing 'study'", line);
  if (!cfg.have_problem) throw ConfigError("missing 'problem'", line);
  if (!cfg.have_eps) throw ConfigError("missing 'eps'", line);
  for (size_t i = 0; i < plan.eps_list.size(); ++i) {
    if (plan.eps_list[i] <= 0)
      throw ConfigError("eps values must be positive", line);
    if (i > 0 && plan.eps_list[i] >= plan.eps_list[i - 1])
      throw ConfigError("eps list must be strictly decreasing", line);
  }
  if (plan.gamma != 0 && plan.kind != StudyKind::test3)
    throw ConfigError("gamma is only valid for study=test3", line);
  if (plan.kind == StudyKind::test3) {
    if (plan.gamma != 1.0 && plan.gamma != 0.5)
      throw ConfigError("test3 needs gamma = 1 or 0.5", line);
    if (!plan.resolutions.empty())
      throw ConfigError("test3 derives the resolution from eps and gamma", line);
  } else if (!plan.auto_resolution && plan.resolutions.empty()) {
    throw ConfigError("missing 'N' or 'mesh'", line);
  }
  if (plan.jobs < 1) throw ConfigError("jobs must be >= 1", line);
}

RunConfig parse_config_keys(const std::string& text) {
  RunConfig cfg;
  std::stringstream ss(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(ss, raw)) {
    ++line_no;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (key.empty() || value.empty()) throw ConfigError("expected key = value", line_no);
    set_config_key(cfg, key, value, line_no);
  }
  return cfg;
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg = parse_config_keys(text);
  validate_config(cfg);
  return cfg;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

} // namespace

std::string records_to_csv(const std::vector<ConvergenceRecord>& recs) {
  std::string out =
      "study,problem,disc,epsilon,h,N,dofs,newton_iters,converged,err_L2,err_H1,err_H2,"
      "ratio_L2_eps,ratio_H1_sqrteps,ratio_H2_qrteps,min_hessian_eig,wall_time_s\n";
  for (const auto& r : recs) {
    out += r.study + ',' + r.problem + ',' + to_string(r.disc) + ',';
    out += fmt(r.epsilon) + ',' + fmt(r.h) + ',' + std::to_string(r.order) + ',';
    out += std::to_string(r.dofs) + ',' + std::to_string(r.newton_iters) + ',';
    out += std::string(r.converged ? "1" : "0") + ',';
    out += fmt(r.err_l2) + ',' + fmt(r.err_h1) + ',' + fmt(r.err_h2) + ',';
    out += fmt(r.ratio_l2) + ',' + fmt(r.ratio_h1) + ',' + fmt(r.ratio_h2) + ',';
    out += fmt(r.min_hessian_eig) + ',' + fmt(r.wall_time_s) + '\n';
  }
  return out;
}

int run_config(const RunConfig& cfg, std::ostream& log) {
  const ProblemSpec problem = builtin_problem(cfg.plan.problem_id);
  std::vector<StudyPointDetail> details;
  try {
    details = run_study_detailed(cfg.plan, problem);
  } catch (const SolverFailure& e) {
    log << "solver failure: " << e.what() << "\n";
    return 4;
  } catch (const SingularMatrixError& e) {
    log << "linear solver failure: " << e.what() << "\n";
    return 4;
  }

  namespace fs = std::filesystem;
  fs::create_directories(cfg.out_dir);
  std::vector<ConvergenceRecord> recs;
  recs.reserve(details.size());
  bool any_nonconverged = false;
  for (const auto& d : details) {
    recs.push_back(d.rec);
    any_nonconverged |= !d.rec.converged;
    log << d.rec.study << ' ' << d.rec.problem << " disc=" << to_string(d.rec.disc)
        << " eps=" << fmt_short(d.rec.epsilon)
        << (d.rec.disc == SpaceKind::spectral ? " N=" : " mesh=") << d.rec.order
        << " iters=" << d.rec.newton_iters << (d.rec.converged ? "" : " NOT-CONVERGED")
        << " errL2=" << fmt_short(d.rec.err_l2) << " errH2=" << fmt_short(d.rec.err_h2)
        << "\n";
  }
  {
    std::ofstream os(fs::path(cfg.out_dir) / "results.csv");
    if (!os) {
      log << "cannot write results.csv under " << cfg.out_dir << "\n";
      return 4;
    }
    os << records_to_csv(recs);
  }
  if (cfg.dump_solutions) {
    for (const auto& d : details) {
      std::string name = d.rec.problem + "_" + to_string(d.rec.disc) + "_" +
                         fmt_short(d.rec.epsilon) + "_";
      if (d.rec.disc == SpaceKind::spectral) name += "N" + std::to_string(d.rec.order);
      else name += "h" + fmt_short(d.rec.h);
      dump_solution_file((fs::path(cfg.out_dir) / (name + ".sol")).string(), d.space,
                         d.rec.epsilon, d.coeffs);
    }
  }
  if (any_nonconverged && cfg.strict) return 3;
  return 0;
}

} // namespace vmma
