#pragma once

#include "vmma/analysis.hpp"

#include <iosfwd>
#include <stdexcept>
#include <string>

// Flat key=value run configuration ('#' comments, comma-separated
// lists) and the batch-run orchestration behind the CLI.
//
// Keys: study, problem, disc, N, mesh, eps, gamma, newton_tol,
//       max_iters, damping, jobs, out, strict, dump_solutions

namespace vmma {

class ConfigError : public std::runtime_error {
public:
  int line;
  ConfigError(const std::string& what, int line_no)
      : std::runtime_error("config error (line " + std::to_string(line_no) + "): " + what),
        line(line_no) {}
};

struct RunConfig {
  StudyPlan plan;
  std::string out_dir = ".";
  bool strict = false;
  bool dump_solutions = false;

  bool have_study = false, have_problem = false, have_eps = false;
};

// Applies one key=value assignment; `line` feeds error reporting.
void set_config_key(RunConfig& cfg, const std::string& key, const std::string& value, int line);

// Parses the key=value lines without the final consistency validation
// (command-line overrides may still come on top).
RunConfig parse_config_keys(const std::string& text);

// Parses the full text; unknown keys and malformed values are rejected
// with the offending line number; plan-consistency violations too.
RunConfig parse_config(const std::string& text);

// Validation shared by parse_config and flag overrides.
void validate_config(const RunConfig& cfg, int line = 0);

std::string records_to_csv(const std::vector<ConvergenceRecord>& recs);

// Runs the configured study, writes results.csv (and solution dumps
// when enabled) under out_dir, prints one summary line per point.
// Returns the process exit code: 0 ok, 3 non-convergence under strict,
// 4 linear-solver failure.
int run_config(const RunConfig& cfg, std::ostream& log);

} // namespace vmma
