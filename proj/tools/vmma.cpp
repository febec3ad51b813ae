// Batch front end: run a convergence study from a config file and/or
// command-line overrides, write results.csv and optional solution dumps.

#include "vmma/config.hpp"
#include "vmma/exec.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv) {
  CLI::App app{"vmma - vanishing-moment Galerkin solver for the Monge-Ampere equation"};

  std::string config_path, study, problem, disc, n_list, mesh_list, eps_list, out_dir;
  std::string gamma_s, jobs_s;
  bool strict = false, dump = false, serial = false;

  app.add_option("--config", config_path, "run configuration file (key = value lines)");
  app.add_option("--study", study, "test1 | test2 | test3");
  app.add_option("--problem", problem, "test1a test1b test2a test2b test3a test3b");
  app.add_option("--disc", disc, "spectral | hermite_fem");
  app.add_option("--N", n_list, "spectral orders, comma separated, or 'auto'");
  app.add_option("--mesh", mesh_list, "fem mesh counts, comma separated");
  app.add_option("--eps", eps_list, "strictly decreasing eps values, comma separated");
  app.add_option("--gamma", gamma_s, "test3 coupling exponent (1 or 0.5)");
  app.add_flag("--strict", strict, "exit 3 on any Newton non-convergence");
  app.add_option("--jobs", jobs_s, "parallel study points (independent points only)");
  app.add_option("--out", out_dir, "output directory (default .)");
  app.add_flag("--dump-solutions", dump, "write per-point solution dumps");
  app.add_flag("--serial", serial, "run the assembly/factorization kernels serially");

  CLI11_PARSE(app, argc, argv);

  if (serial) vmma::exec::set_mode(vmma::exec::Mode::serial);

  try {
    vmma::RunConfig cfg;
    if (!config_path.empty()) {
      std::ifstream is(config_path);
      if (!is) {
        std::cerr << "config error: cannot open '" << config_path << "'\n";
        return 2;
      }
      std::stringstream ss;
      ss << is.rdbuf();
      cfg = vmma::parse_config_keys(ss.str());
    }
    auto override_key = [&cfg](const std::string& key, const std::string& value) {
      if (!value.empty()) vmma::set_config_key(cfg, key, value, 0);
    };
    override_key("study", study);
    override_key("problem", problem);
    override_key("disc", disc);
    override_key("N", n_list);
    override_key("mesh", mesh_list);
    override_key("eps", eps_list);
    override_key("gamma", gamma_s);
    override_key("jobs", jobs_s);
    override_key("out", out_dir);
    if (strict) cfg.strict = true;
    if (dump) cfg.dump_solutions = true;
    vmma::validate_config(cfg);
    return vmma::run_config(cfg, std::cout);
  } catch (const vmma::ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
