#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wpic/geometry.hpp"
#include "wpic/rng.hpp"
#include "wpic/scenario.hpp"

namespace wpic {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Distance-dependent power gain ref_loss * d^(-exponent). Distances below
// d_min are clamped to d_min; non-positive distances after clamping are an
// invalid-geometry error.
inline constexpr double kMinLinkDistance = 0.1;
double path_loss(double distance_m, double exponent, double ref_loss);

// Deterministic unit-modulus rank-one LoS component: half-wavelength ULA
// steering responses along the x-axis, with cosines taken from the link
// direction. angle_rx/angle_tx are direction cosines in [-1, 1].
MatrixXcd los_matrix(int rows, int cols, double cos_rx, double cos_tx);

// sqrt(gain) * (sqrt(k/(1+k)) * H_los + sqrt(1/(1+k)) * H_nlos) with CN(0,1)
// NLoS entries. Defaults give the broadside (all-ones) LoS matrix.
MatrixXcd sample_rician(int rows, int cols, double gain, double kappa, Rng& rng,
                        double cos_rx = 0.0, double cos_tx = 0.0);

// Every sampled UL channel plus the composite matrices psi[k][i]. DL channels
// are transposes of these (reciprocity); only the UL direction is stored.
struct ChannelSet {
  int K = 0, L = 0, M = 0, N = 0;
  std::vector<int> n_per_irs;                 // size L
  std::vector<std::vector<VectorXcd>> e;      // [K][L], length N_l  (WD k -> IRS l)
  std::vector<std::vector<MatrixXcd>> h;      // [L][K], M x N_l     (IRS l -> HAP i)
  std::vector<std::vector<VectorXcd>> g;      // [K][K], length M    (WD k -> HAP i)
  std::vector<std::vector<MatrixXcd>> psi;    // [K][K], M x (N+1)

  // psi[k][i] = [H_i diag(e_k), g[k][i]] with H_i and e_k concatenated over l.
  void rebuild_composites();
};

// Versioned channel file: generating config + dimensions header + flattened
// complex arrays as (re, im) pairs. Round-trips losslessly at double
// precision; psi is rebuilt from the stored links on load.
std::string channels_to_json(const ChannelSet& cs, const ScenarioConfig& cfg);
std::pair<ChannelSet, ScenarioConfig> channels_from_json(const std::string& text);
void save_channel_file(const std::string& path, const ChannelSet& cs, const ScenarioConfig& cfg);
std::pair<ChannelSet, ScenarioConfig> load_channel_file(const std::string& path);

// Samples all links with per-link path loss from pairwise distances and
// assembles the composites. Deterministic given (cfg, cfg.seed).
ChannelSet assemble_channels(const ScenarioConfig& cfg);
ChannelSet assemble_channels(const ScenarioConfig& cfg, const NodePositions& pos, Rng& rng);

}  // namespace wpic
