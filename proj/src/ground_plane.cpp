#include "plausible/ground_plane.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "plausible/error.hpp"

namespace plausible {

void HorizontalConfig::validate() const {
  if (!(normal_tolerance_deg > 0 && normal_tolerance_deg < 45))
    throw Error(ErrorCode::SchemaViolation, "horizontal.normal_tolerance_deg must lie in (0, 45)");
  if (!(z_std_threshold > 0))
    throw Error(ErrorCode::SchemaViolation, "horizontal.z_std_threshold must be positive");
}

std::vector<Plane> filter_horizontal(const std::vector<Plane>& planes, const HorizontalConfig& cfg) {
  cfg.validate();
  const double min_cos = std::cos(cfg.normal_tolerance_deg * std::numbers::pi / 180.0);
  std::vector<Plane> out;
  for (const auto& p : planes) {
    const double cos_angle = p.normal.z() / p.normal.norm();
    if (cos_angle >= min_cos && p.axis_std.z() < cfg.z_std_threshold) out.push_back(p);
  }
  return out;
}

Plane select_ground(const std::vector<Plane>& planes, const HorizontalConfig& cfg) {
  const auto horizontal = filter_horizontal(planes, cfg);
  if (horizontal.empty()) throw Error(ErrorCode::NoGroundPlane, "no horizontal plane detected");
  const Plane* best = &horizontal.front();
  for (const auto& p : horizontal) {
    const double dz = p.centroid.z() - best->centroid.z();
    if (dz < -1e-9 || (std::abs(dz) <= 1e-9 && p.inliers.size() > best->inliers.size())) best = &p;
  }
  return *best;
}

FloorStats floor_stats(const Plane& plane, const PointCloud& cloud) {
  if (plane.inliers.size() < 2)
    throw Error(ErrorCode::DegenerateFloor, "floor plane has fewer than 2 inliers");
  const double n = static_cast<double>(plane.inliers.size());
  Vec3 mean = Vec3::Zero();
  for (int i : plane.inliers) mean += cloud.points[i];
  mean /= n;
  // Deviations are taken from the first inlier and then re-centered, so
  // identical points give exactly zero spread.
  const Vec3 ref = cloud.points[plane.inliers.front()];
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int i : plane.inliers) {
    const Vec3 d = cloud.points[i] - ref;
    sx += d.x();
    sy += d.y();
    sxx += d.x() * d.x();
    syy += d.y() * d.y();
  }
  const double vx = std::max(0.0, sxx - sx * sx / n);
  const double vy = std::max(0.0, syy - sy * sy / n);
  FloorStats stats;
  stats.center = mean;
  stats.sigma_x = std::sqrt(vx / n);
  stats.sigma_y = std::sqrt(vy / n);
  stats.plane = plane;
  return stats;
}

}  // namespace plausible
