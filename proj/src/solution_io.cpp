#include "vmma/solution_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vmma {

void dump_solution(std::ostream& os, const FunctionSpace& space, double epsilon,
                   const DofVector& coeffs) {
  check_space_match(space, coeffs);
  char buf[64];
  os << "vmma-solution 1\n";
  if (space.kind == SpaceKind::spectral) {
    std::snprintf(buf, sizeof buf, "%.17g", epsilon);
    os << "spectral " << space.dim() << ' ' << space.order << ' ' << buf << '\n';
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", epsilon);
    os << "hermite_fem " << space.dim() << ' ' << space.nx << 'x' << space.ny << ' ' << buf
       << '\n';
  }
  for (double c : coeffs.coeffs) {
    std::snprintf(buf, sizeof buf, "%.17g", c);
    os << buf << '\n';
  }
}

void dump_solution_file(const std::string& path, const FunctionSpace& space, double epsilon,
                        const DofVector& coeffs) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("dump_solution_file: cannot open " + path);
  dump_solution(os, space, epsilon, coeffs);
}

LoadedSolution load_solution(std::istream& is) {
  std::string magic;
  int version = 0;
  is >> magic >> version;
  if (magic != "vmma-solution" || version != 1)
    throw std::runtime_error("load_solution: not a vmma-solution version 1 file");
  LoadedSolution s;
  std::string kind, order;
  is >> kind >> s.dim >> order >> s.epsilon;
  if (kind == "spectral") {
    s.kind = SpaceKind::spectral;
    s.order = std::stoi(order);
  } else if (kind == "hermite_fem") {
    s.kind = SpaceKind::hermite_fem;
    const auto x = order.find('x');
    if (x == std::string::npos) throw std::runtime_error("load_solution: bad mesh spec");
    s.nx = std::stoi(order.substr(0, x));
    s.ny = std::stoi(order.substr(x + 1));
  } else {
    throw std::runtime_error("load_solution: unknown kind " + kind);
  }
  double c;
  while (is >> c) s.coeffs.push_back(c);
  if (s.coeffs.empty()) throw std::runtime_error("load_solution: no coefficients");
  return s;
}

LoadedSolution load_solution_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("load_solution_file: cannot open " + path);
  return load_solution(is);
}

} // namespace vmma
