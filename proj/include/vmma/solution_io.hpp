#pragma once

#include "vmma/space.hpp"

#include <iosfwd>
#include <string>

// Versioned text dump of a discrete field:
//   line 1: "vmma-solution 1"
//   line 2: kind dim order epsilon   (order is N for spectral, NXxNY for fem)
//   then one coefficient per line in the documented DOF order, printed
//   with 17 significant digits so doubles round-trip exactly.

namespace vmma {

struct LoadedSolution {
  SpaceKind kind = SpaceKind::spectral;
  int dim = 2;
  int order = 0;      // spectral
  int nx = 0, ny = 0; // hermite_fem
  double epsilon = 0.0;
  std::vector<double> coeffs;
};

void dump_solution(std::ostream& os, const FunctionSpace& space, double epsilon,
                   const DofVector& coeffs);
void dump_solution_file(const std::string& path, const FunctionSpace& space, double epsilon,
                        const DofVector& coeffs);

LoadedSolution load_solution(std::istream& is);
LoadedSolution load_solution_file(const std::string& path);

} // namespace vmma
