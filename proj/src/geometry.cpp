#include "wpic/geometry.hpp"

#include <numbers>

namespace wpic {

NodePositions place_nodes(const ScenarioConfig& cfg) {
  cfg.validate();
  NodePositions pos;
  pos.hap.resize(cfg.K);
  pos.wd.resize(cfg.K);
  pos.irs.resize(cfg.L);

  const double two_pi = 2.0 * std::numbers::pi;
  const double hap_radius = std::abs(cfg.d_hap);
  const double hap_flip = cfg.d_hap < 0.0 ? std::numbers::pi : 0.0;

  for (int k = 0; k < cfg.K; ++k) {
    double angle = two_pi * k / cfg.K;
    pos.hap[k] = {hap_radius * std::cos(angle + hap_flip),
                  hap_radius * std::sin(angle + hap_flip), 0.0};
    pos.wd[k] = {cfg.d_wd * std::cos(angle), cfg.d_wd * std::sin(angle), 0.0};
  }
  for (int l = 0; l < cfg.L; ++l) {
    double angle = two_pi * l / cfg.L;
    pos.irs[l] = {cfg.d_i * std::cos(angle), cfg.d_i * std::sin(angle), cfg.d_h};
  }
  return pos;
}

}  // namespace wpic
