#pragma once

#include "wpic/allocation.hpp"
#include "wpic/channel.hpp"
#include "wpic/conic/program.hpp"
#include "wpic/scenario.hpp"
#include "wpic/system_metrics.hpp"

namespace wpic::conic {

// The three convex subproblem families of the alternating optimization. Each
// builder linearizes around the current allocation (the SCA local point) and
// returns the program plus the index maps needed to write a solution back.

// Joint time/covariance/power step: variables {delta_j, St_{i,j} = delta_j
// S_{i,j}, pt_{k,j} = delta_j p_{k,j}} with a perspective-form concave rate
// objective. HAPs with P_i = 0 and WDs that cannot harvest any energy are
// pinned out.
struct TimePowerProgram {
  ConicProgram prog;
  std::vector<ScalarVar> delta_vars;            // per phase
  std::vector<std::vector<PsdVar>> cov_vars;    // [K][J], id -1 when pinned zero
  std::vector<std::vector<ScalarVar>> pow_vars; // [K][J], id -1 when pinned zero

  // Un-substitutes (delta, St/delta, pt/delta) into `alloc`; collapsed phases
  // (delta <= 1e-10) keep their previous S and p.
  void apply(const ConicSolution& sol, Allocation& alloc) const;
};
TimePowerProgram build_time_power_sdp(const Allocation& alloc, const ChannelSet& channels,
                                      const ScenarioConfig& cfg);

// Phase-1 reflection step: maximize the summed EH residuals subject to the
// linearized harvested-energy lower bound. `trivial` marks programs in which
// v_1 cannot affect any constraint (zero first-phase duration or all-zero
// energy quadratics with zero slack everywhere).
struct V1Program {
  ConicProgram prog;
  bool trivial = false;
  VectorVar v1;
  std::vector<ScalarVar> residual_vars;  // per WD, id -1 when pinned zero

  void apply(const ConicSolution& sol, Allocation& alloc) const;
  double residual(const ConicSolution& sol, int k) const;
};
V1Program build_v1_qcp(const Allocation& alloc, const ChannelSet& channels,
                       const ScenarioConfig& cfg);

// Reflection step for the remaining phases: slack-variable SINR epigraph with
// quadratic interference terms and linearized energy constraints. Rate pairs
// whose local SINR is numerically zero are dropped (their linearization has
// zero gradient); `trivial` marks programs with no remaining rate terms.
struct VhatProgram {
  ConicProgram prog;
  bool trivial = false;
  std::vector<VectorVar> v_vars;  // per phase, id -1 for phase 0 / absent
  struct RatePair {
    int i, j;
    ScalarVar z;
    double z_local;
  };
  std::vector<RatePair> pairs;

  void apply(const ConicSolution& sol, Allocation& alloc) const;
};
VhatProgram build_vhat_qcp(const Allocation& alloc, const ChannelSet& channels,
                           const ScenarioConfig& cfg);

}  // namespace wpic::conic
