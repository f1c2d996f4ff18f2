#pragma once

#include "calib/types.hpp"

#include <span>
#include <vector>

namespace calib {

/// One planar world <-> image correspondence (world Z = 0).
struct PlanarCorrespondence {
    double X = 0.0;
    double Y = 0.0;
    double u = 0.0;
    double v = 0.0;
};

/// Normalized DLT homography mapping (X, Y, 1) to (u, v, 1) up to scale.
/// Both point sets are isotropically normalized before the linear solve and
/// the result is rescaled so h33 = 1 when |h33| > 1e-12. Throws
/// DegenerateConfiguration on rank-deficient configurations (fewer than 4
/// points, collinear points, ...).
Eigen::Matrix3d estimate_homography(std::span<const PlanarCorrespondence> correspondences);

/// Closed-form intrinsics from a set of homographies via the image of the
/// absolute conic (two linear constraints per view). Needs N >= 3, or
/// N >= 2 with the skew constrained to zero. Throws InsufficientViews /
/// IllConditioned.
Intrinsics intrinsics_from_homographies(std::span<const Eigen::Matrix3d> homographies,
                                        bool fix_skew = false);

/// Per-view pose from H and A: r1 = s A^{-1} h1, r2 = s A^{-1} h2,
/// r3 = r1 x r2, t = s A^{-1} h3 with s = 1/|A^{-1} h1|, the sign chosen so
/// the target sits in front of the camera, and [r1 r2 r3] projected to the
/// nearest rotation.
Extrinsics extrinsics_from_homography(const Eigen::Matrix3d &homography, const Intrinsics &intr);

} // namespace calib
