#pragma once

#include <string>

#include "wpic/allocation.hpp"
#include "wpic/channel.hpp"
#include "wpic/scenario.hpp"

namespace wpic {

// Energy collected by WD k in phase j [J]:
//   eta * delta_j * sum_{i active} tr(Psi*_{k,i} v*_j v_j^T Psi^T_{k,i} S_{i,j}),
// noise power excluded. Throws std::logic_error when k does not harvest in j.
double harvested_energy(int k, int j, const Allocation& alloc, const ChannelSet& channels,
                        const ScenarioConfig& cfg);

// Receive-combiner output SINR of pair i in phase j. Throws std::logic_error
// when i does not decode in j.
double sinr(int i, int j, const Allocation& alloc, const ChannelSet& channels,
            const ScenarioConfig& cfg);

// sum_i sum_{j in rx phases} delta_j log2(1 + sinr(i, j)); zero-duration
// phases contribute exactly 0.
double sum_throughput(const Allocation& alloc, const ChannelSet& channels,
                      const ScenarioConfig& cfg);

// Total transmission energy at the HAPs: sum delta_j tr(S_{i,j}) over the
// energy phases [J].
double total_energy(const Allocation& alloc);

// Max violation per constraint family, normalized (powers by P_i, durations
// by T, energies by harvested energy). Reports, never throws.
struct FeasibilityReport {
  double energy_causality = 0.0;  // (2b)
  double total_time = 0.0;        // (2c)
  double trace_power = 0.0;       // (2d)
  double receiver_norm = 0.0;     // (2e), |  ||w||^2 - 1 |
  double irs_modulus = 0.0;       // (2f), max(|v_n| - 1, 0)
  double irs_pinned = 0.0;        // (2f), | v_{N+1} - 1 |
  double psd = 0.0;               // max(-lambda_min(S), 0) / P_i
  double tolerance = 1e-6;
  bool pass = false;

  double worst() const;
  std::string summary() const;
};

FeasibilityReport check_feasibility(const Allocation& alloc, const ChannelSet& channels,
                                    const ScenarioConfig& cfg, double tol = 1e-6);

}  // namespace wpic
