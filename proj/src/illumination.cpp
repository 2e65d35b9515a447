#include "plausible/illumination.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "plausible/error.hpp"

namespace plausible {
namespace {

constexpr double kPi = std::numbers::pi;

std::pair<double, double> latitude_range(Coverage coverage) {
  return coverage == Coverage::UpperHemisphere ? std::pair{0.0, kPi / 2} : std::pair{-kPi / 2, kPi / 2};
}

void check_map(const EnvMap& map) {
  if (map.width <= 0 || map.height <= 0 ||
      map.data.size() != static_cast<std::size_t>(map.width) * map.height * 3)
    throw Error(ErrorCode::DimensionMismatch, "environment map size does not match its data");
}

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4);
  std::uint32_t bits;
  std::memcpy(&bits, &value, 4);
  if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
  char bytes[4];
  std::memcpy(bytes, &bits, 4);
  out.write(bytes, 4);
}

template <class T>
T get_le(std::istream& in, bool swap_from_big = false) {
  static_assert(sizeof(T) == 4);
  char bytes[4];
  if (!in.read(bytes, 4)) throw Error(ErrorCode::SchemaViolation, "truncated binary file");
  std::uint32_t bits;
  std::memcpy(&bits, bytes, 4);
  const bool file_big = swap_from_big;
  if ((std::endian::native == std::endian::big) != file_big) bits = __builtin_bswap32(bits);
  T value;
  std::memcpy(&value, &bits, 4);
  return value;
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingFile, path.string());
    throw Error(ErrorCode::IoError, "cannot read " + path.string());
  }
  return in;
}

}  // namespace

void LightingConfig::validate() const {
  if (!(gamma > 0)) throw Error(ErrorCode::InvalidGamma, "gamma must be positive");
}

EnvMap EnvMapGrid::cell(int gx, int gy) const {
  EnvMap map(map_w, map_h);
  const std::size_t offset = (static_cast<std::size_t>(gy) * grid_w + gx) * cell_floats();
  std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(offset), cell_floats(), map.data.begin());
  return map;
}

void EnvMapGrid::set_cell(int gx, int gy, const EnvMap& map) {
  if (map.width != map_w || map.height != map_h)
    throw Error(ErrorCode::DimensionMismatch, "cell map size differs from grid map size");
  const std::size_t offset = (static_cast<std::size_t>(gy) * grid_w + gx) * cell_floats();
  std::copy(map.data.begin(), map.data.end(), data.begin() + static_cast<std::ptrdiff_t>(offset));
}

EnvMap retrieve_envmap(const EnvMapGrid& grid, double u, double v, int image_width, int image_height) {
  const int cell = EnvMapGrid::kCellPixels;
  if (grid.grid_w != (image_width + cell - 1) / cell || grid.grid_h != (image_height + cell - 1) / cell)
    throw Error(ErrorCode::DimensionMismatch, "environment-map grid does not tile the image in 4x4 blocks");
  if (!(u >= 0 && u < image_width && v >= 0 && v < image_height))
    throw Error(ErrorCode::OutOfBounds, "pixel (" + std::to_string(u) + ", " + std::to_string(v) +
                                            ") outside the image");
  const int gx = static_cast<int>(std::floor(u / cell));
  const int gy = static_cast<int>(std::floor(v / cell));
  return grid.cell(gx, gy);
}

Vec3 pixel_to_direction(int i, int j, int width, int height, Coverage coverage) {
  if (i < 0 || j < 0 || i >= width || j >= height)
    throw Error(ErrorCode::IndexOutOfRange, "map pixel index outside the map");
  const auto [lat_min, lat_max] = latitude_range(coverage);
  const double lon = 2.0 * kPi * (i + 0.5) / width - kPi;
  const double lat = lat_max - (lat_max - lat_min) * (j + 0.5) / height;
  return {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
}

MapCoord direction_to_pixel(const Vec3& direction, int width, int height, Coverage coverage) {
  const auto [lat_min, lat_max] = latitude_range(coverage);
  const Vec3 d = direction.normalized();
  const double lon = std::atan2(d.y(), d.x());
  const double lat = std::asin(std::clamp(d.z(), -1.0, 1.0));
  return {(lon + kPi) / (2.0 * kPi) * width, (lat_max - lat) / (lat_max - lat_min) * height};
}

Vec3 sample_bilinear(const EnvMap& map, const Vec3& direction, Coverage coverage) {
  const MapCoord mc = direction_to_pixel(direction, map.width, map.height, coverage);
  const double fx = mc.x - 0.5;
  const double fy = mc.y - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double tx = fx - x0f;
  const double ty = fy - y0f;
  auto wrap = [&](long long x) { return static_cast<int>(((x % map.width) + map.width) % map.width); };
  auto clampy = [&](long long y) { return static_cast<int>(std::clamp<long long>(y, 0, map.height - 1)); };
  const int x0 = wrap(static_cast<long long>(x0f));
  const int x1 = wrap(static_cast<long long>(x0f) + 1);
  const int y0 = clampy(static_cast<long long>(y0f));
  const int y1 = clampy(static_cast<long long>(y0f) + 1);
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    // Lerp form: equal corners give that value exactly.
    const double a = map.at(x0, y0, c), b = map.at(x1, y0, c);
    const double e = map.at(x0, y1, c), f = map.at(x1, y1, c);
    const double top = a + (b - a) * tx;
    const double bottom = e + (f - e) * tx;
    out(c) = top + (bottom - top) * ty;
  }
  return out;
}

EnvMap complete_latitude(const EnvMap& half, const CompletionPolicy& policy) {
  check_map(half);
  EnvMap full(half.width, 2 * half.height);
  std::copy(half.data.begin(), half.data.end(), full.data.begin());
  const std::size_t row_floats = static_cast<std::size_t>(half.width) * 3;
  for (int y = half.height; y < full.height; ++y) {
    auto dst = full.data.begin() + static_cast<std::ptrdiff_t>(y * row_floats);
    if (policy.kind == CompletionPolicy::Kind::ReplicateHorizon) {
      auto src = half.data.begin() + static_cast<std::ptrdiff_t>((half.height - 1) * row_floats);
      std::copy_n(src, row_floats, dst);
    } else {
      std::fill_n(dst, row_floats, policy.value);
    }
  }
  return full;
}

EnvMap refine_intensity(const EnvMap& map, double gamma) {
  if (!(gamma > 0)) throw Error(ErrorCode::InvalidGamma, "gamma must be positive");
  // powf is not correctly rounded; a double pow followed by one rounding is.
  EnvMap out = map;
  for (float& v : out.data) v = static_cast<float>(std::pow(static_cast<double>(v), gamma));
  return out;
}

Mat3 surface_frame(const Vec3& normal) {
  const Vec3 ref = std::abs(normal.x()) > 0.999 ? Vec3::UnitY() : Vec3::UnitX();
  const Vec3 tangent = (ref - ref.dot(normal) * normal).normalized();
  const Vec3 bitangent = normal.cross(tangent);
  Mat3 r;
  r.col(0) = tangent;
  r.col(1) = bitangent;
  r.col(2) = normal;
  return r;
}

EnvMap rotate_envmap(const EnvMap& full, const Mat3& rotation) {
  check_map(full);
  EnvMap out(full.width, full.height);
  const Mat3 inv = rotation.transpose();
  for (int j = 0; j < full.height; ++j) {
    for (int i = 0; i < full.width; ++i) {
      const Vec3 d_world = pixel_to_direction(i, j, full.width, full.height, Coverage::FullSphere);
      const Vec3 rgb = sample_bilinear(full, inv * d_world, Coverage::FullSphere);
      for (int c = 0; c < 3; ++c) out.at(i, j, c) = static_cast<float>(rgb(c));
    }
  }
  return out;
}

EnvMap transform_to_world(const EnvMap& full, const Vec3& normal) {
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-6)
    throw Error(ErrorCode::NonUnitNormal, "surface normal must be unit length");
  const Mat3 frame = surface_frame(normal);
  if (frame == Mat3::Identity()) return full;
  return rotate_envmap(full, frame);
}

EnvMap build_insertion_envmap(const EnvMapGrid& grid, const Vec3& insertion_point, const CameraIntrinsics& intr,
                              const RigidTransform& cam_to_world, const Vec3& floor_normal,
                              const LightingConfig& cfg, const std::filesystem::path& pfm_out) {
  cfg.validate();
  const PixelCoord px = project_to_pixel(insertion_point, intr, cam_to_world);
  const EnvMap half = retrieve_envmap(grid, px.u, px.v, intr.width, intr.height);
  const EnvMap full = complete_latitude(half, cfg.completion);
  const EnvMap hdr = refine_intensity(full, cfg.gamma);
  EnvMap world = transform_to_world(hdr, floor_normal);
  if (!pfm_out.empty()) write_pfm(pfm_out, world);
  return world;
}

void write_pfm(const std::filesystem::path& path, const EnvMap& map) {
  check_map(map);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << "PF\n" << map.width << ' ' << map.height << "\n-1.0\n";
  for (int y = map.height - 1; y >= 0; --y)
    for (int x = 0; x < map.width; ++x)
      for (int c = 0; c < 3; ++c) put_le(out, map.at(x, y, c));
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

EnvMap read_pfm(const std::filesystem::path& path) {
  std::ifstream in = open_binary(path);
  std::string magic;
  int w = 0, h = 0;
  double scale = 0;
  in >> magic >> w >> h >> scale;
  if (!in || magic != "PF" || w <= 0 || h <= 0 || scale == 0)
    throw Error(ErrorCode::SchemaViolation, path.string() + " is not a colour PFM file");
  in.get();  // single whitespace after the scale
  const bool big_endian = scale > 0;
  EnvMap map(w, h);
  for (int y = h - 1; y >= 0; --y)
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) map.at(x, y, c) = get_le<float>(in, big_endian);
  return map;
}

void write_envmap_grid(const std::filesystem::path& path, const EnvMapGrid& grid) {
  if (grid.data.size() != static_cast<std::size_t>(grid.grid_w) * grid.grid_h * grid.cell_floats())
    throw Error(ErrorCode::DimensionMismatch, "grid data size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write("ENVG", 4);
  for (std::uint32_t v : {std::uint32_t(grid.grid_w), std::uint32_t(grid.grid_h), std::uint32_t(grid.map_w),
                          std::uint32_t(grid.map_h), std::uint32_t(3)})
    put_le(out, v);
  for (float v : grid.data) put_le(out, v);
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

EnvMapGrid read_envmap_grid(const std::filesystem::path& path) {
  std::ifstream in = open_binary(path);
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "ENVG", 4) != 0)
    throw Error(ErrorCode::SchemaViolation, path.string() + " lacks the ENVG magic");
  const auto gw = get_le<std::uint32_t>(in);
  const auto gh = get_le<std::uint32_t>(in);
  const auto mw = get_le<std::uint32_t>(in);
  const auto mh = get_le<std::uint32_t>(in);
  const auto channels = get_le<std::uint32_t>(in);
  if (channels != 3 || gw == 0 || gh == 0 || mw == 0 || mh == 0)
    throw Error(ErrorCode::SchemaViolation, path.string() + ": invalid ENVG header");
  EnvMapGrid grid(static_cast<int>(gw), static_cast<int>(gh), static_cast<int>(mw), static_cast<int>(mh));
  for (float& v : grid.data) {
    v = get_le<float>(in);
    if (!std::isfinite(v) || v < 0.0f || v > 1.0f)
      throw Error(ErrorCode::SchemaViolation, path.string() + ": grid values must lie in [0, 1]");
  }
  return grid;
}

}  // namespace plausible
