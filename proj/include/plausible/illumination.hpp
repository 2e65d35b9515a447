#pragma once

#include <filesystem>
#include <vector>

#include "plausible/geometry.hpp"
#include "plausible/scene_io.hpp"

namespace plausible {

/// Latitude span of an equirectangular map.
enum class Coverage {
  UpperHemisphere,  // latitude (0, pi/2): the estimator's half maps
  FullSphere,       // latitude (-pi/2, pi/2)
};

/// RGB float equirectangular image, row-major, channels interleaved. Row 0 is
/// the highest latitude; column 0 starts at longitude -pi.
struct EnvMap {
  int width = 0, height = 0;
  std::vector<float> data;

  EnvMap() = default;
  EnvMap(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  float& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  bool operator==(const EnvMap&) const = default;
};

/// Spatially varying lighting: one half-sphere map per 4x4 image block.
struct EnvMapGrid {
  static constexpr int kCellPixels = 4;

  int grid_w = 0, grid_h = 0;
  int map_w = 0, map_h = 0;
  std::vector<float> data;  // cell-row-major, then map row-major, RGB

  EnvMapGrid() = default;
  EnvMapGrid(int gw, int gh, int mw, int mh, float fill = 0.0f)
      : grid_w(gw), grid_h(gh), map_w(mw), map_h(mh),
        data(static_cast<std::size_t>(gw) * gh * mw * mh * 3, fill) {}

  std::size_t cell_floats() const { return static_cast<std::size_t>(map_w) * map_h * 3; }
  EnvMap cell(int gx, int gy) const;
  void set_cell(int gx, int gy, const EnvMap& map);
  bool operator==(const EnvMapGrid&) const = default;
};

struct CompletionPolicy {
  enum class Kind { ReplicateHorizon, Constant };
  Kind kind = Kind::ReplicateHorizon;
  float value = 0.0f;

  static CompletionPolicy replicate_horizon() { return {}; }
  static CompletionPolicy constant(float v) { return {Kind::Constant, v}; }
};

struct LightingConfig {
  double gamma = 2.0;
  CompletionPolicy completion;

  void validate() const;
};

/// Map of the 4x4 block containing continuous pixel (u, v). Throws
/// OutOfBounds outside [0, width) x [0, height), DimensionMismatch if the
/// grid does not tile the image.
EnvMap retrieve_envmap(const EnvMapGrid& grid, double u, double v, int image_width, int image_height);

/// Unit direction at the center of pixel (i, j), in the map's local frame
/// (+Z = surface normal). Throws IndexOutOfRange.
Vec3 pixel_to_direction(int i, int j, int width, int height, Coverage coverage);

struct MapCoord {
  double x = 0, y = 0;  // continuous; pixel (i, j) center is (i + 0.5, j + 0.5)
};
MapCoord direction_to_pixel(const Vec3& direction, int width, int height, Coverage coverage);

/// Bilinear lookup with longitude wraparound and latitude clamping.
Vec3 sample_bilinear(const EnvMap& map, const Vec3& direction, Coverage coverage);

/// Doubles the height; the lower hemisphere is filled per `policy`.
EnvMap complete_latitude(const EnvMap& half, const CompletionPolicy& policy);

/// out = in^gamma per channel. Throws InvalidGamma for gamma <= 0.
EnvMap refine_intensity(const EnvMap& map, double gamma);

/// Columns (tangent, bitangent, normal); tangent is world X projected onto the
/// surface (world Y when the normal is within ~2.6 deg of X).
Mat3 surface_frame(const Vec3& normal);

/// output(d) = input(R^T d) for full-sphere maps.
EnvMap rotate_envmap(const EnvMap& full, const Mat3& rotation);

/// Local (+Z = normal) full map to the world frame. Exact copy when the frame
/// is the identity. Throws NonUnitNormal.
EnvMap transform_to_world(const EnvMap& full, const Vec3& normal);

EnvMap build_insertion_envmap(const EnvMapGrid& grid, const Vec3& insertion_point, const CameraIntrinsics& intr,
                              const RigidTransform& cam_to_world, const Vec3& floor_normal,
                              const LightingConfig& cfg, const std::filesystem::path& pfm_out);

// Binary little-endian PFM, rows stored bottom-to-top.
void write_pfm(const std::filesystem::path& path, const EnvMap& map);
EnvMap read_pfm(const std::filesystem::path& path);

// "ENVG" + u32 grid_w, grid_h, map_w, map_h, channels(=3), then float32 data.
void write_envmap_grid(const std::filesystem::path& path, const EnvMapGrid& grid);
EnvMapGrid read_envmap_grid(const std::filesystem::path& path);

}  // namespace plausible
