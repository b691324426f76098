#pragma once

#include "routhft/numerics.hpp"
#include "routhft/routh.hpp"

namespace routhft {

// Sampled reduced solution over a coordinate rectangle (simply connected):
// the non-cyclic fields u^b and the momentum/velocity components sigma^a_i.
struct ReducedSectionData {
  std::shared_ptr<Chart> chart; // the unreduced chart
  CyclicAction action;
  Grid grid;                                   // axes follow the base coords
  std::map<std::string, GridField> fields;     // non-cyclic u^b by name
  std::vector<std::vector<GridField>> sigma;   // [cyclic][m]
};

// A^a_j = sigma^a_j + Gamma^a_j(x, u(x)) + sum_b Gamma^a_b(x, u(x)) du^b/dx^j
std::vector<std::vector<GridField>> lift_components(const ReducedSectionData& data,
                                                    const ConnectionData& conn);

// flat-condition residual per cyclic a and axis pair i < j, oriented as
// d_j A^a_i - d_i A^a_j so that for m = 2 it reads d(sigma)/dx - d(rho)/dt
struct FlatResidual {
  // residual[a] maps the pair index (i, j), i < j, to the residual field
  std::vector<std::map<std::pair<int, int>, GridField>> residual;
  double max_norm = 0;
};
FlatResidual flat_residual(const ReducedSectionData& data, const ConnectionData& conn);

// phi^a(x) = phi^a(x0) + int A^a_j dx^j along the axis-ordered staircase
// path from the grid corner `base_index`, by composite trapezoid rule.
// Throws if the flat residual exceeds `tol` (default 10 h^2 scale).
std::vector<GridField> lift_section(const ReducedSectionData& data,
                                    const ConnectionData& conn,
                                    const std::vector<int>& base_index,
                                    const std::vector<double>& initial_values,
                                    double tol = -1.0);

} // namespace routhft
