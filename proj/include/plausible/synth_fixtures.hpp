#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "plausible/geometry.hpp"
#include "plausible/json_util.hpp"
#include "plausible/rng.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {

/// Axis-aligned room: floor z = 0 over [0, width] x [0, depth], up to four
/// walls, and clutter boxes resting on the floor.
struct RoomSpec {
  double width = 4.0;   // floor extent along X (m)
  double depth = 4.0;   // floor extent along Y (m)
  bool has_floor = true;
  // Walls at x = 0, x = width, y = 0, y = depth; height 0 means absent.
  std::array<double, 4> wall_heights = {2.5, 2.5, 2.5, 2.5};
  std::vector<Annotation> clutter;
  CameraIntrinsics intrinsics{300.0, 300.0, 160.0, 120.0, 320, 240};
  RigidTransform camera;
  double noise_sigma = 0.0;  // meters

  void validate() const;
};

struct GroundTruthPlane {
  Vec3 normal = Vec3::UnitZ();  // same sign convention as extracted planes
  double offset = 0;
  std::string label;
  int visible_pixels = 0;
};

struct RenderedRoom {
  DepthImage depth;               // metric, unquantized, noise applied
  std::vector<int> surface;       // per pixel index into `planes`, -1 on miss
  std::vector<GroundTruthPlane> planes;  // every surface of the room
};

/// Analytic ray cast of the room. Pixel (u, v) casts the ray through
/// ((u - cx)/fx, (v - cy)/fy, 1) in camera coordinates.
RenderedRoom cast_room(const RoomSpec& spec, std::uint64_t seed);

struct FixturePaths {
  std::filesystem::path manifest;
  std::filesystem::path depth_png;
  std::filesystem::path rgb_png;
  std::filesystem::path ground_truth;
};

/// Renders the room, writes depth PNG (millimeters), a placeholder RGB PNG,
/// the scene manifest, and the ground-truth sidecar into `dir`.
FixturePaths render_depth(const RoomSpec& spec, std::uint64_t seed, const std::filesystem::path& dir,
                          const std::string& stem);

/// Camera-to-world pose at `eye` looking at `target` (camera x right,
/// y down, z forward; world +Z up).
RigidTransform look_at(const Vec3& eye, const Vec3& target);

struct RandomRoomOptions {
  int min_clutter = 1;
  int max_clutter = 3;
  double noise_sigma = 0.0;
};

/// Randomized furnished room with the camera near the y = 0 wall.
RoomSpec random_room(Rng& rng, const RandomRoomOptions& options);

struct BenchmarkRoomOptions {
  double room_size = 4.0;
  int cubes = 3;
  double cube_size = 0.5;
  double noise_sigma = 0.0;
};

/// Square walled room holding `cubes` randomly placed and rotated cubes, the
/// rendered counterpart of the analytic search benchmark. Camera as in
/// random_room.
RoomSpec benchmark_room(Rng& rng, const BenchmarkRoomOptions& options);

Json ground_truth_to_json(const RoomSpec& spec, const RenderedRoom& render);

}  // namespace plausible
