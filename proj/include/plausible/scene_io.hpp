#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "plausible/geometry.hpp"

namespace plausible {

/// Per-pixel metric depth (camera-frame z). Invalid pixels hold 0.
struct DepthImage {
  int width = 0, height = 0;
  std::vector<double> values;
  std::vector<std::uint8_t> valid;

  DepthImage() = default;
  DepthImage(int w, int h)
      : width(w), height(h), values(static_cast<std::size_t>(w) * h, 0.0),
        valid(static_cast<std::size_t>(w) * h, 0) {}

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  double at(int u, int v) const { return values[index(u, v)]; }
  bool is_valid(int u, int v) const { return valid[index(u, v)] != 0; }
  void set(int u, int v, double d) {
    values[index(u, v)] = d;
    valid[index(u, v)] = (std::isfinite(d) && d > 0) ? 1 : 0;
  }
};

/// Organized world-frame point cloud. `depth` keeps the camera-frame depth of
/// each pixel for discontinuity tests.
struct PointCloud {
  int width = 0, height = 0;
  std::vector<Vec3> points;
  std::vector<double> depth;
  std::vector<std::uint8_t> valid;

  std::size_t size() const { return points.size(); }
  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
};

struct Annotation {
  std::string category;
  Obb3D box;
};

struct Scene {
  CameraIntrinsics intrinsics;
  RigidTransform cam_to_world;
  DepthImage depth;
  std::string rgb_path;
  std::vector<Annotation> annotations;
};

/// Reads a scene manifest (JSON) and its 16-bit millimeter depth PNG.
/// Relative paths resolve against the manifest's directory.
Scene load_scene(const std::filesystem::path& manifest_path);

DepthImage depth_from_millimeters(const std::vector<std::uint16_t>& mm, int width, int height);

PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr, const RigidTransform& pose);

Vec3 backproject_pixel(double u, double v, double d, const CameraIntrinsics& intr,
                       const RigidTransform& pose);

struct PixelCoord {
  double u = 0, v = 0;
};

/// Continuous pixel coordinates of a world point. Throws BehindCamera when
/// the camera-frame depth is not positive.
PixelCoord project_to_pixel(const Vec3& world, const CameraIntrinsics& intr, const RigidTransform& pose);

}  // namespace plausible
