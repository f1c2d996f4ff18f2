#pragma once

#include "calib/types.hpp"

namespace calib {

/// Axis-angle vector to rotation matrix (Rodrigues). The zero vector maps
/// to the identity.
Eigen::Matrix3d rotation_from_vec(const Eigen::Vector3d &rvec);

/// Rotation matrix back to the canonical axis-angle vector with |vec| < pi.
Eigen::Vector3d vec_from_rotation(const Eigen::Matrix3d &rot);

/// Distortion-free perspective projection of a world point to pixels.
/// Throws NonPositiveDepth when the point is at or behind the camera plane.
PixelPoint project(const WorldPoint &point, const Intrinsics &intr, const Extrinsics &extr);

/// World point to normalized image coordinates (projection without the
/// camera matrix). Throws NonPositiveDepth when depth <= 0.
NormalizedPoint project_normalized(const WorldPoint &point, const Extrinsics &extr);

/// Apply A: u = alpha*x + gamma*y + u0, v = beta*y + v0.
PixelPoint normalized_to_pixel(const NormalizedPoint &p, const Intrinsics &intr);

/// Apply A^{-1}, in closed form from the upper-triangular structure.
/// Throws SingularIntrinsics when alpha or beta is zero.
NormalizedPoint pixel_to_normalized(const PixelPoint &p, const Intrinsics &intr);

} // namespace calib
