#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace wpic {

// Physical and geometric parameters of one experiment instance.
// All values linear-scale SI; loaders accept *_dbm / *_db aliases.
struct ScenarioConfig {
  int K = 4;          // HAP-WD pair count
  int L = 4;          // IRS count
  int M = 2;          // antennas per HAP
  int N_per_irs = 10; // elements per IRS, N = L * N_per_irs

  double T = 1.0;    // total transmission time [s]
  double eta = 0.7;  // energy conversion efficiency

  std::vector<double> P;       // per-HAP max transmit power [W], size K
  std::vector<double> sigma2;  // per-HAP noise power [W], size K

  double d_hap = -4.0;  // HAP polar radius [m]; negative flips to angle + pi
  double d_wd = 7.0;    // WD polar radius [m]
  double d_i = 7.0;     // IRS radial distance [m]
  double d_h = 2.0;     // IRS height [m]

  double alpha_irs = 2.2;     // path-loss exponent, IRS-related links
  double alpha_direct = 3.5;  // path-loss exponent, direct links
  double rician_irs = 1.9952623149688795;  // 3 dB, linear
  double rician_direct = 0.0;
  double ref_loss = 1e-3;  // path loss at 1 m, linear gain

  std::uint64_t seed = 1;

  int n_total() const { return L * N_per_irs; }

  // Fig. 2-style geometry at full scale: K = 4 pairs, N = 40 elements.
  static ScenarioConfig paper_defaults();
  // Reduced profile used throughout the test suite: K = 2, N = 8.
  static ScenarioConfig desk_defaults();

  // Throws std::invalid_argument on violated invariants.
  void validate() const;

  std::string to_json() const;
  static ScenarioConfig from_json(const std::string& text);
  static ScenarioConfig load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace wpic
