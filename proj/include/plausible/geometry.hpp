#pragma once

#include <Eigen/Dense>

namespace plausible {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct CameraIntrinsics {
  double fx = 0, fy = 0;
  double cx = 0, cy = 0;
  int width = 0, height = 0;

  // Throws InvalidCalibration when fx/fy are non-positive or the principal
  // point lies outside the image.
  void validate() const;
};

/// Rigid camera-to-world transform. World +Z points opposite gravity.
struct RigidTransform {
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();

  Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
  Vec3 apply_inverse(const Vec3& p) const { return rotation.transpose() * (p - translation); }

  // Orthonormality and det = +1 within 1e-6, else InvalidCalibration.
  void validate() const;
};

/// Gravity-aligned box: only rotation about world Z is allowed.
struct Obb3D {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();
  double yaw = 0;  // radians, [-pi, pi]

  double bottom_z() const { return center.z() - half_extents.z(); }
  double height() const { return 2.0 * half_extents.z(); }

  // Positive extents and yaw in [-pi, pi], else SchemaViolation.
  void validate() const;
};

}  // namespace plausible
