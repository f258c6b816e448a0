#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "wpic/scenario.hpp"

namespace wpic {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;
};

inline double distance(const Vec3& a, const Vec3& b) {
  double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

struct NodePositions {
  std::vector<Vec3> hap;  // size K
  std::vector<Vec3> wd;   // size K
  std::vector<Vec3> irs;  // size L
};

// HAP k and WD k sit at polar angle 2*pi*k/K in the z = 0 plane; a negative
// d_hap flips the HAP to the opposite angle. IRS l sits at height d_h over
// the same angular grid (one IRS per pair sector when L == K, uniform in
// angle otherwise).
NodePositions place_nodes(const ScenarioConfig& cfg);

}  // namespace wpic
