#include "plausible/synth_fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "plausible/error.hpp"
#include "plausible/png_io.hpp"

namespace plausible {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Vec3 canonical(Vec3 n) {
  if (std::abs(n.z()) > 1e-12) return n.z() < 0 ? Vec3(-n) : n;
  if (std::abs(n.x()) > 1e-12) return n.x() < 0 ? Vec3(-n) : n;
  return n.y() < 0 ? Vec3(-n) : n;
}

Mat3 rot_z(double yaw) {
  Mat3 r;
  r << std::cos(yaw), -std::sin(yaw), 0, std::sin(yaw), std::cos(yaw), 0, 0, 0, 1;
  return r;
}

struct Hit {
  double t = kInf;
  int surface = -1;
};

struct Caster {
  const RoomSpec& spec;
  std::vector<GroundTruthPlane> planes;
  int floor_index = -1;
  std::array<int, 4> wall_index{-1, -1, -1, -1};
  int first_box_face = 0;

  explicit Caster(const RoomSpec& s) : spec(s) {
    auto add = [&](const Vec3& n, const Vec3& point, std::string label) {
      GroundTruthPlane p;
      p.normal = canonical(n);
      p.offset = -p.normal.dot(point);
      p.label = std::move(label);
      planes.push_back(p);
      return static_cast<int>(planes.size()) - 1;
    };
    if (spec.has_floor) floor_index = add(Vec3::UnitZ(), Vec3::Zero(), "floor");
    const char* names[4] = {"wall_x0", "wall_x1", "wall_y0", "wall_y1"};
    const Vec3 normals[4] = {Vec3::UnitX(), Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitY()};
    const Vec3 points[4] = {Vec3::Zero(), Vec3(spec.width, 0, 0), Vec3::Zero(), Vec3(0, spec.depth, 0)};
    for (int w = 0; w < 4; ++w)
      if (spec.wall_heights[w] > 0) wall_index[w] = add(normals[w], points[w], names[w]);
    first_box_face = static_cast<int>(planes.size());
    for (std::size_t b = 0; b < spec.clutter.size(); ++b) {
      const Obb3D& box = spec.clutter[b].box;
      const Mat3 r = rot_z(box.yaw);
      const char* faces[6] = {"+x", "-x", "+y", "-y", "+z", "-z"};
      for (int f = 0; f < 6; ++f) {
        const int axis = f / 2;
        const double sign = (f % 2 == 0) ? 1.0 : -1.0;
        const Vec3 local_n = sign * Vec3::Unit(axis);
        const Vec3 point = box.center + r * (local_n * box.half_extents(axis));
        add(r * local_n, point, "box" + std::to_string(b) + faces[f]);
      }
    }
  }

  Hit cast(const Vec3& o, const Vec3& d) const {
    Hit best;
    auto consider = [&](double t, int surface) {
      if (t > 0 && t < best.t) best = {t, surface};
    };
    if (floor_index >= 0 && d.z() != 0) {
      const double t = -o.z() / d.z();
      const Vec3 p = o + t * d;
      if (p.x() >= 0 && p.x() <= spec.width && p.y() >= 0 && p.y() <= spec.depth) consider(t, floor_index);
    }
    for (int w = 0; w < 4; ++w) {
      if (wall_index[w] < 0) continue;
      const int axis = w < 2 ? 0 : 1;
      const double plane = (w == 1) ? spec.width : (w == 3) ? spec.depth : 0.0;
      if (d(axis) == 0) continue;
      const double t = (plane - o(axis)) / d(axis);
      const Vec3 p = o + t * d;
      const int other = 1 - axis;
      const double extent = other == 0 ? spec.width : spec.depth;
      if (p(other) >= 0 && p(other) <= extent && p.z() >= 0 && p.z() <= spec.wall_heights[w])
        consider(t, wall_index[w]);
    }
    for (std::size_t b = 0; b < spec.clutter.size(); ++b) {
      const Obb3D& box = spec.clutter[b].box;
      const Mat3 rt = rot_z(box.yaw).transpose();
      const Vec3 ol = rt * (o - box.center);
      const Vec3 dl = rt * d;
      double t_near = -kInf, t_far = kInf;
      int near_face = -1;
      bool miss = false;
      for (int a = 0; a < 3 && !miss; ++a) {
        const double h = box.half_extents(a);
        if (dl(a) == 0) {
          miss = std::abs(ol(a)) > h;
          continue;
        }
        double t1 = (-h - ol(a)) / dl(a);
        double t2 = (h - ol(a)) / dl(a);
        // Entering through the -h face when moving in +a.
        int face = dl(a) > 0 ? 2 * a + 1 : 2 * a;
        if (t1 > t2) std::swap(t1, t2);
        if (t1 > t_near) {
          t_near = t1;
          near_face = face;
        }
        t_far = std::min(t_far, t2);
      }
      if (!miss && near_face >= 0 && t_near <= t_far) consider(t_near, first_box_face + 6 * static_cast<int>(b) + near_face);
    }
    return best;
  }
};

}  // namespace

void RoomSpec::validate() const {
  if (!(width > 0) || !(depth > 0)) throw Error(ErrorCode::SchemaViolation, "room extents must be positive");
  for (double h : wall_heights)
    if (h < 0) throw Error(ErrorCode::SchemaViolation, "wall heights must be non-negative");
  for (const auto& c : clutter) {
    c.box.validate();
    if (std::abs(c.box.bottom_z()) > 1e-9)
      throw Error(ErrorCode::SchemaViolation, "clutter boxes must rest on the floor");
  }
  if (noise_sigma < 0) throw Error(ErrorCode::SchemaViolation, "noise sigma must be non-negative");
  intrinsics.validate();
  camera.validate();
}

RenderedRoom cast_room(const RoomSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Caster caster(spec);
  const auto& intr = spec.intrinsics;
  RenderedRoom out;
  out.depth = DepthImage(intr.width, intr.height);
  out.surface.assign(static_cast<std::size_t>(intr.width) * intr.height, -1);
  out.planes = caster.planes;

  Rng rng(seed);
  const Vec3 origin = spec.camera.translation;
  for (int v = 0; v < intr.height; ++v) {
    for (int u = 0; u < intr.width; ++u) {
      const Vec3 dir = spec.camera.rotation * Vec3((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
      const Hit hit = caster.cast(origin, dir);
      if (hit.surface < 0) continue;
      const std::size_t i = out.depth.index(u, v);
      out.surface[i] = hit.surface;
      ++out.planes[hit.surface].visible_pixels;
      double d = hit.t;
      if (spec.noise_sigma > 0) d += rng.normal(0.0, spec.noise_sigma);
      out.depth.set(u, v, d);
    }
  }
  return out;
}

Json ground_truth_to_json(const RoomSpec& spec, const RenderedRoom& render) {
  Json planes = Json::array();
  for (const auto& p : render.planes) {
    Json e;
    e["normal"] = to_json(p.normal);
    e["offset"] = p.offset;
    e["label"] = p.label;
    e["visible_pixels"] = p.visible_pixels;
    planes.push_back(e);
  }
  Json boxes = Json::array();
  for (const auto& c : spec.clutter) {
    Json b = to_json(c.box);
    b["category"] = c.category;
    boxes.push_back(b);
  }
  Json j;
  j["planes"] = planes;
  j["boxes"] = boxes;
  j["floor_z"] = 0.0;
  return j;
}

FixturePaths render_depth(const RoomSpec& spec, std::uint64_t seed, const std::filesystem::path& dir,
                          const std::string& stem) {
  const RenderedRoom render = cast_room(spec, seed);
  std::filesystem::create_directories(dir);
  FixturePaths paths;
  paths.manifest = dir / (stem + ".json");
  paths.depth_png = dir / (stem + "_depth.png");
  paths.rgb_png = dir / (stem + "_rgb.png");
  paths.ground_truth = dir / (stem + "_gt.json");

  Gray16Image png;
  png.width = render.depth.width;
  png.height = render.depth.height;
  png.pixels.assign(render.depth.values.size(), 0);
  for (std::size_t i = 0; i < png.pixels.size(); ++i) {
    if (!render.depth.valid[i]) continue;
    const double mm = std::round(render.depth.values[i] * 1000.0);
    if (mm >= 1 && mm <= 65535) png.pixels[i] = static_cast<std::uint16_t>(mm);
  }
  write_png_gray16(paths.depth_png, png);
  write_png_rgb8_solid(paths.rgb_png, png.width, png.height, 128, 128, 128);

  const auto& intr = spec.intrinsics;
  Json m;
  m["rgb"] = paths.rgb_png.filename().string();
  m["depth"] = paths.depth_png.filename().string();
  m["intrinsics"] = {{"fx", intr.fx}, {"fy", intr.fy}, {"cx", intr.cx},
                     {"cy", intr.cy}, {"width", intr.width}, {"height", intr.height}};
  Json rot = Json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) rot.push_back(spec.camera.rotation(r, c));
  m["cam_to_world"] = {{"rotation", rot}, {"translation", to_json(spec.camera.translation)}};
  Json ann = Json::array();
  for (const auto& c : spec.clutter) {
    Json a;
    a["category"] = c.category;
    a["center"] = to_json(c.box.center);
    a["half_extents"] = to_json(c.box.half_extents);
    a["yaw"] = c.box.yaw;
    ann.push_back(a);
  }
  m["annotations"] = ann;
  write_json_file(paths.manifest, m);
  write_json_file(paths.ground_truth, ground_truth_to_json(spec, render));
  return paths;
}

RigidTransform look_at(const Vec3& eye, const Vec3& target) {
  const Vec3 forward = (target - eye).normalized();
  Vec3 right = forward.cross(Vec3::UnitZ());
  if (right.norm() < 1e-9) right = Vec3::UnitX();
  right.normalize();
  const Vec3 down = forward.cross(right);
  RigidTransform pose;
  pose.rotation.col(0) = right;
  pose.rotation.col(1) = down;
  pose.rotation.col(2) = forward;
  pose.translation = eye;
  return pose;
}

RoomSpec random_room(Rng& rng, const RandomRoomOptions& options) {
  struct Furniture {
    const char* category;
    double w, d, h;
  };
  static constexpr Furniture kFurniture[] = {
      {"chair", 0.5, 0.5, 0.9},  {"table", 1.2, 0.8, 0.75},     {"nightstand", 0.45, 0.4, 0.55},
      {"desk", 1.2, 0.6, 0.75},  {"dresser", 1.0, 0.5, 0.9},    {"bookshelf", 0.8, 0.35, 1.8},
      {"sofa", 1.8, 0.9, 0.85},  {"bed", 2.0, 1.5, 0.55},
  };

  RoomSpec spec;
  spec.width = rng.uniform(3.5, 6.0);
  spec.depth = rng.uniform(3.5, 6.0);
  spec.wall_heights = {2.6, 2.6, 2.6, 2.6};
  spec.noise_sigma = options.noise_sigma;

  const int count = options.min_clutter +
                    static_cast<int>(rng.index(static_cast<std::uint64_t>(options.max_clutter - options.min_clutter + 1)));
  std::vector<std::pair<Vec2, double>> placed;  // center, circumradius
  for (int n = 0; n < count; ++n) {
    const Furniture& f = kFurniture[rng.index(std::size(kFurniture))];
    const double jitter = rng.uniform(0.9, 1.1);
    const Vec3 half(f.w * jitter / 2, f.d * jitter / 2, f.h * jitter / 2);
    const double radius = half.head<2>().norm();
    for (int attempt = 0; attempt < 50; ++attempt) {
      const double x = rng.uniform(radius + 0.1, spec.width - radius - 0.1);
      const double y = rng.uniform(std::max(1.5, radius + 0.1), spec.depth - radius - 0.1);
      const double yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
      if (!(x > 0 && y > 0 && x < spec.width && y < spec.depth)) continue;
      bool clear = true;
      for (const auto& [c, r] : placed) clear = clear && (c - Vec2(x, y)).norm() > r + radius + 0.1;
      if (!clear) continue;
      placed.emplace_back(Vec2(x, y), radius);
      Annotation a;
      a.category = f.category;
      a.box.center = Vec3(x, y, half.z());
      a.box.half_extents = half;
      a.box.yaw = yaw;
      spec.clutter.push_back(a);
      break;
    }
  }

  const Vec3 eye(rng.uniform(0.35, 0.65) * spec.width, 0.3, rng.uniform(1.3, 1.7));
  const Vec3 target(eye.x() + rng.uniform(-0.5, 0.5), 0.6 * spec.depth, 0.0);
  spec.camera = look_at(eye, target);
  return spec;
}

RoomSpec benchmark_room(Rng& rng, const BenchmarkRoomOptions& options) {
  RoomSpec spec;
  spec.width = spec.depth = options.room_size;
  spec.noise_sigma = options.noise_sigma;
  const double h = options.cube_size / 2;
  for (int i = 0; i < options.cubes; ++i) {
    Annotation a;
    a.category = "box";
    a.box.center = Vec3(rng.uniform(h, spec.width - h), rng.uniform(h, spec.depth - h), h);
    a.box.half_extents = Vec3(h, h, h);
    a.box.yaw = rng.uniform(-std::numbers::pi, std::numbers::pi);
    spec.clutter.push_back(a);
  }
  const Vec3 eye(rng.uniform(0.35, 0.65) * spec.width, 0.3, rng.uniform(1.3, 1.7));
  const Vec3 target(eye.x() + rng.uniform(-0.5, 0.5), 0.6 * spec.depth, 0.0);
  spec.camera = look_at(eye, target);
  return spec;
}

}  // namespace plausible
