#pragma once

#include "wpic/conic/program.hpp"

namespace wpic::conic {

struct SolveOptions {
  double eps = 1e-8;   // gap/stationarity target
  int max_iter = 500;  // total Newton (interior-point) step budget
};

// Log-barrier interior-point method over the realified program. A phase-I
// s-relaxation restores strict feasibility when the variable hints are only
// boundary-feasible; quadratic modulus bounds, coordinate floors and PSD
// cones are kept hard throughout. Deterministic given identical inputs.
ConicSolution solve(const Compiled& prog, const SolveOptions& opts = {});
ConicSolution solve(const ConicProgram& prog, const SolveOptions& opts = {});

}  // namespace wpic::conic
