#include "calib/geometry.hpp"

#include <cmath>

namespace calib {

namespace {
constexpr double kSmallAngle = 1e-12;
}

Eigen::Matrix3d rotation_from_vec(const Eigen::Vector3d &rvec) {
    const double theta = rvec.norm();
    if (theta < kSmallAngle) {
        return Eigen::Matrix3d::Identity();
    }
    const Eigen::Vector3d axis = rvec / theta;
    Eigen::Matrix3d skew;
    skew << 0.0, -axis.z(), axis.y(), axis.z(), 0.0, -axis.x(), -axis.y(), axis.x(), 0.0;
    return Eigen::Matrix3d::Identity() + std::sin(theta) * skew +
           (1.0 - std::cos(theta)) * (skew * skew);
}

Eigen::Vector3d vec_from_rotation(const Eigen::Matrix3d &rot) {
    const double cos_theta = std::clamp((rot.trace() - 1.0) * 0.5, -1.0, 1.0);
    const double theta = std::acos(cos_theta);
    Eigen::Vector3d skew_part(rot(2, 1) - rot(1, 2), rot(0, 2) - rot(2, 0), rot(1, 0) - rot(0, 1));

    if (theta < 1e-7) {
        // First-order expansion; exact to O(theta^3).
        return 0.5 * skew_part;
    }
    if (theta > M_PI - 1e-7) {
        // Near pi the skew part degenerates; recover the axis from the
        // symmetric part R + I = 2(cos^2(theta/2) I + sin^2 ... ) ~ 2 a a^T.
        Eigen::Matrix3d sym = 0.5 * (rot + Eigen::Matrix3d::Identity());
        int k = 0;
        sym.diagonal().maxCoeff(&k);
        Eigen::Vector3d axis = sym.col(k) / std::sqrt(std::max(sym(k, k), 1e-300));
        axis.normalize();
        // Pick the sign consistent with the skew part when it is nonzero.
        if (skew_part.dot(axis) < 0.0) {
            axis = -axis;
        }
        return theta * axis;
    }
    return (theta / (2.0 * std::sin(theta))) * skew_part;
}

Extrinsics Extrinsics::from_rotation_vec(const Eigen::Vector3d &rvec, const Eigen::Vector3d &t) {
    Extrinsics e;
    e.rotation = rotation_from_vec(rvec);
    e.rotation_vec = rvec;
    e.translation = t;
    return e;
}

Extrinsics Extrinsics::from_matrix(const Eigen::Matrix3d &rot, const Eigen::Vector3d &t) {
    Extrinsics e;
    e.rotation = rot;
    e.rotation_vec = vec_from_rotation(rot);
    e.translation = t;
    return e;
}

NormalizedPoint project_normalized(const WorldPoint &point, const Extrinsics &extr) {
    const Eigen::Vector3d cam =
        extr.rotation * Eigen::Vector3d(point.x, point.y, point.z) + extr.translation;
    if (cam.z() <= 0.0) {
        throw NonPositiveDepth("point has non-positive camera depth " + std::to_string(cam.z()));
    }
    return {cam.x() / cam.z(), cam.y() / cam.z()};
}

PixelPoint project(const WorldPoint &point, const Intrinsics &intr, const Extrinsics &extr) {
    return normalized_to_pixel(project_normalized(point, extr), intr);
}

PixelPoint normalized_to_pixel(const NormalizedPoint &p, const Intrinsics &intr) {
    return {intr.alpha * p.x + intr.gamma * p.y + intr.u0, intr.beta * p.y + intr.v0};
}

NormalizedPoint pixel_to_normalized(const PixelPoint &p, const Intrinsics &intr) {
    if (!intr.invertible()) {
        throw SingularIntrinsics("camera matrix is singular (alpha or beta is zero)");
    }
    const double y = (p.v - intr.v0) / intr.beta;
    const double x = (p.u - intr.u0 - intr.gamma * y) / intr.alpha;
    return {x, y};
}

} // namespace calib
