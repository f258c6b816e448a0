#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wpic/scheme.hpp"

namespace wpic {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Full decision-variable bundle {delta, S, p, w, v} for one scheme. Entries
// outside a scheme's masks are kept as structural zeros, so TDMA/Syn
// allocations embed into the Asy layout without translation.
struct Allocation {
  SchemeSpec scheme;
  int M = 0;   // antennas per HAP
  int Nv = 0;  // IRS vector length N+1

  std::vector<double> delta;                 // [J] phase durations [s]
  std::vector<std::vector<MatrixXcd>> S;     // [K][J], M x M energy covariances [W]
  std::vector<std::vector<double>> p;        // [K][J] UL transmit powers [W]
  std::vector<std::vector<VectorXcd>> w;     // [K][J], length M receive vectors
  std::vector<VectorXcd> v;                  // [J], length N+1 reflection vectors

  Allocation() = default;
  Allocation(const SchemeSpec& scheme_, int M_, int N_total);

  int phases() const { return scheme.phases(); }

  // IRS off: v_j = [0,...,0,1] for every phase.
  void set_irs_off();

  std::string to_json() const;
  static Allocation from_json(const std::string& text);
  static Allocation load(const std::string& path);
  void save(const std::string& path) const;
};

}  // namespace wpic
