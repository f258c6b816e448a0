#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wpic/allocation.hpp"
#include "wpic/channel.hpp"
#include "wpic/scenario.hpp"
#include "wpic/system_metrics.hpp"

namespace wpic {

struct OptimizerConfig {
  double eps_outer = 1e-3;  // relative objective improvement threshold
  int max_outer = 100;
  int sca_inner = 1;  // SCA passes per block per outer iteration
  double eps_solver = 1e-8;
  int solver_max_iter = 200;
  bool irs_enabled = true;  // false pins v = [0,...,0,1] and skips both v blocks
  std::optional<Allocation> warm_start;
};

struct OptimizationResult {
  Allocation allocation;
  std::vector<double> objective_trace;  // one entry per block update
  double sum_throughput = 0.0;
  double total_energy = 0.0;
  int iterations = 0;
  bool converged = false;
  FeasibilityReport feasibility;
  double wall_time = 0.0;  // seconds; kept out of serialized results

  std::string to_json() const;
  static OptimizationResult from_json(const std::string& text);
  void save(const std::string& path) const;
  static OptimizationResult load(const std::string& path);
};

// Closed-form SINR-optimal unit-norm receive vector for pair i in phase j:
// normalized (sum_{k!=i} p_k a_k a_k^H + sigma^2 I)^{-1} a_i with a_k =
// Psi_{k,i} v_j. A zero desired channel returns e_1 and sets *zero_channel.
VectorXcd mmse_receiver(int i, int j, const Allocation& alloc, const ChannelSet& channels,
                        const ScenarioConfig& cfg, bool* zero_channel = nullptr);

// Feasible starting allocation: uniform durations, isotropic covariances,
// unit-amplitude random reflection phases (seeded from cfg.seed and the
// scheme), energy-saturating equal-split powers backed off by 1e-3, and MMSE
// receivers.
Allocation initialize(const SchemeSpec& scheme, const ChannelSet& channels,
                      const ScenarioConfig& cfg, const OptimizerConfig& opt_cfg);

// Re-expresses a TDMA or Syn allocation in the Asy phase layout (identical
// throughput and energy; receivers refreshed for the wider mask).
Allocation embed_into_asy(const Allocation& alloc, const ChannelSet& channels,
                          const ScenarioConfig& cfg);

// Three-block alternating optimization with a monotone acceptance guard.
OptimizationResult optimize(const SchemeSpec& scheme, const ChannelSet& channels,
                            const ScenarioConfig& cfg, const OptimizerConfig& opt_cfg);

// TDMA and Syn from fresh starts; Asy three times (fresh, TDMA-warm,
// Syn-warm), keeping the best, so reported Asy >= max(TDMA, Syn) - 1e-9.
std::map<SchemeKind, OptimizationResult> optimize_all_schemes(const ChannelSet& channels,
                                                              const ScenarioConfig& cfg,
                                                              const OptimizerConfig& opt_cfg);

}  // namespace wpic
