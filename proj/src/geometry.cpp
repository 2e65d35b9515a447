#include "plausible/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "plausible/error.hpp"

namespace plausible {

void CameraIntrinsics::validate() const {
  if (!(fx > 0) || !(fy > 0))
    throw Error(ErrorCode::InvalidCalibration, "focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw Error(ErrorCode::InvalidCalibration, "image size must be positive");
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height))
    throw Error(ErrorCode::InvalidCalibration, "principal point outside the image");
}

void RigidTransform::validate() const {
  if (!rotation.allFinite() || !translation.allFinite())
    throw Error(ErrorCode::InvalidCalibration, "non-finite pose");
  const double ortho_err = (rotation.transpose() * rotation - Mat3::Identity()).cwiseAbs().maxCoeff();
  if (ortho_err > 1e-6)
    throw Error(ErrorCode::InvalidCalibration,
                "rotation is not orthonormal (max |RtR - I| = " + std::to_string(ortho_err) + ")");
  if (std::abs(rotation.determinant() - 1.0) > 1e-6)
    throw Error(ErrorCode::InvalidCalibration, "rotation determinant is not +1");
}

void Obb3D::validate() const {
  if (!center.allFinite() || !half_extents.allFinite() || !std::isfinite(yaw))
    throw Error(ErrorCode::SchemaViolation, "box has non-finite values");
  if ((half_extents.array() <= 0).any())
    throw Error(ErrorCode::SchemaViolation, "box half_extents must be positive");
  if (yaw < -std::numbers::pi || yaw > std::numbers::pi)
    throw Error(ErrorCode::SchemaViolation, "box yaw must lie in [-pi, pi]");
}

}  // namespace plausible
