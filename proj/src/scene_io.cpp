#include "plausible/scene_io.hpp"

#include "plausible/error.hpp"
#include "plausible/json_util.hpp"
#include "plausible/png_io.hpp"

namespace plausible {
namespace {

std::filesystem::path resolve(const std::filesystem::path& base_dir, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() ? path : base_dir / path;
}

CameraIntrinsics parse_intrinsics(const Json& j) {
  CameraIntrinsics intr;
  intr.fx = as_number(require(j, "fx", "intrinsics"), "intrinsics.fx");
  intr.fy = as_number(require(j, "fy", "intrinsics"), "intrinsics.fy");
  intr.cx = as_number(require(j, "cx", "intrinsics"), "intrinsics.cx");
  intr.cy = as_number(require(j, "cy", "intrinsics"), "intrinsics.cy");
  const Json& w = require(j, "width", "intrinsics");
  const Json& h = require(j, "height", "intrinsics");
  if (!w.is_number_integer() || !h.is_number_integer())
    throw Error(ErrorCode::SchemaViolation, "intrinsics.width/height must be integers");
  intr.width = w.get<int>();
  intr.height = h.get<int>();
  intr.validate();
  return intr;
}

RigidTransform parse_pose(const Json& j) {
  const Json& rot = require(j, "rotation", "cam_to_world");
  const Json& trans = require(j, "translation", "cam_to_world");
  if (!rot.is_array() || rot.size() != 9)
    throw Error(ErrorCode::SchemaViolation, "cam_to_world.rotation must be 9 numbers (row-major)");
  RigidTransform pose;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) pose.rotation(r, c) = as_number(rot[3 * r + c], "cam_to_world.rotation");
  pose.translation = as_vec3(trans, "cam_to_world.translation");
  pose.validate();
  return pose;
}

}  // namespace

DepthImage depth_from_millimeters(const std::vector<std::uint16_t>& mm, int width, int height) {
  DepthImage depth(width, height);
  for (std::size_t i = 0; i < mm.size(); ++i) {
    if (mm[i] == 0) continue;
    depth.values[i] = mm[i] / 1000.0;
    depth.valid[i] = 1;
  }
  return depth;
}

Scene load_scene(const std::filesystem::path& manifest_path) {
  const Json j = read_json_file(manifest_path);
  if (!j.is_object()) throw Error(ErrorCode::SchemaViolation, "scene manifest must be a JSON object");
  const auto base = manifest_path.parent_path();

  Scene scene;
  scene.rgb_path = as_string(require(j, "rgb", "manifest"), "rgb");
  scene.intrinsics = parse_intrinsics(require(j, "intrinsics", "manifest"));
  scene.cam_to_world = parse_pose(require(j, "cam_to_world", "manifest"));

  const Json& ann = require(j, "annotations", "manifest");
  if (!ann.is_array()) throw Error(ErrorCode::SchemaViolation, "annotations must be an array");
  for (std::size_t i = 0; i < ann.size(); ++i) {
    const std::string ctx = "annotations[" + std::to_string(i) + "]";
    Annotation a;
    a.category = as_string(require(ann[i], "category", ctx), ctx + ".category");
    if (a.category.empty()) throw Error(ErrorCode::SchemaViolation, ctx + ".category is empty");
    a.box = obb_from_json(ann[i], ctx);
    scene.annotations.push_back(std::move(a));
  }

  const auto depth_path = resolve(base, as_string(require(j, "depth", "manifest"), "depth"));
  const Gray16Image png = read_png_gray16(depth_path);
  if (png.width != scene.intrinsics.width || png.height != scene.intrinsics.height)
    throw Error(ErrorCode::SchemaViolation, "depth image size does not match intrinsics");
  scene.depth = depth_from_millimeters(png.pixels, png.width, png.height);
  return scene;
}

Vec3 backproject_pixel(double u, double v, double d, const CameraIntrinsics& intr,
                       const RigidTransform& pose) {
  const Vec3 cam((u - intr.cx) / intr.fx * d, (v - intr.cy) / intr.fy * d, d);
  return pose.apply(cam);
}

PointCloud backproject(const DepthImage& depth, const CameraIntrinsics& intr, const RigidTransform& pose) {
  if (depth.width != intr.width || depth.height != intr.height)
    throw Error(ErrorCode::DimensionMismatch, "depth image and intrinsics disagree on size");
  PointCloud cloud;
  cloud.width = depth.width;
  cloud.height = depth.height;
  cloud.points.assign(depth.values.size(), Vec3::Zero());
  cloud.depth = depth.values;
  cloud.valid = depth.valid;
  for (int v = 0; v < depth.height; ++v) {
    for (int u = 0; u < depth.width; ++u) {
      const std::size_t i = depth.index(u, v);
      if (!depth.valid[i]) continue;
      cloud.points[i] = backproject_pixel(u, v, depth.values[i], intr, pose);
    }
  }
  return cloud;
}

PixelCoord project_to_pixel(const Vec3& world, const CameraIntrinsics& intr, const RigidTransform& pose) {
  const Vec3 cam = pose.apply_inverse(world);
  if (!(cam.z() > 0)) throw Error(ErrorCode::BehindCamera, "camera-frame depth is not positive");
  return {intr.fx * cam.x() / cam.z() + intr.cx, intr.fy * cam.y() / cam.z() + intr.cy};
}

}  // namespace plausible
