#pragma once

#include <vector>

#include "plausible/plane_extraction.hpp"

namespace plausible {

struct HorizontalConfig {
  double normal_tolerance_deg = 10.0;
  double z_std_threshold = 0.05;

  void validate() const;
};

/// Search-square statistics of the selected floor.
struct FloorStats {
  Vec3 center = Vec3::Zero();  // mean of floor inlier points
  double sigma_x = 0;          // population std along world X
  double sigma_y = 0;
  Plane plane;
};

std::vector<Plane> filter_horizontal(const std::vector<Plane>& planes, const HorizontalConfig& cfg);

/// Lowest-centroid horizontal plane; ties within 1e-9 go to the larger
/// inlier count. Throws NoGroundPlane.
Plane select_ground(const std::vector<Plane>& planes, const HorizontalConfig& cfg);

/// Throws DegenerateFloor with fewer than two inliers.
FloorStats floor_stats(const Plane& plane, const PointCloud& cloud);

}  // namespace plausible
