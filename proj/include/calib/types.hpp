#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <string>

namespace calib {

// All errors thrown by the library derive from Error so callers can catch
// the whole family at once.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonPositiveDepth : Error {
    using Error::Error;
};
struct SingularIntrinsics : Error {
    using Error::Error;
};
struct PoleAtRadius : Error {
    using Error::Error;
};
struct NoRealRoot : Error {
    using Error::Error;
};
struct DegenerateQuadratic : Error {
    using Error::Error;
};
struct NoConvergence : Error {
    NoConvergence(const std::string &msg, double residual) : Error(msg), last_residual(residual) {}
    double last_residual;
};
struct InvalidKnot : Error {
    using Error::Error;
};
struct EmptyDataset : Error {
    using Error::Error;
};
struct DegenerateConfiguration : Error {
    using Error::Error;
};
struct InsufficientViews : Error {
    using Error::Error;
};
struct IllConditioned : Error {
    using Error::Error;
};
struct PointOutOfFrame : Error {
    PointOutOfFrame(const std::string &msg, int view_idx, int point_idx)
        : Error(msg), view(view_idx), point(point_idx) {}
    int view;
    int point;
};
struct ParseError : Error {
    using Error::Error;
};

/// Observed or predicted image location in pixels.
struct PixelPoint {
    double u = 0.0;
    double v = 0.0;
};

/// Image location after removing the camera matrix: [x, y, 1]^T = A^{-1} [u, v, 1]^T.
struct NormalizedPoint {
    double x = 0.0;
    double y = 0.0;

    double radius() const { return std::hypot(x, y); }
    double radius_sq() const { return x * x + y * y; }
};

/// Point in the world frame. Planar targets live in the Z = 0 plane.
struct WorldPoint {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// The five intrinsic parameters of the upper-triangular camera matrix
///   A = [alpha gamma u0; 0 beta v0; 0 0 1].
struct Intrinsics {
    double alpha = 1.0; // focal scale, x axis (pixels)
    double beta = 1.0;  // focal scale, y axis (pixels)
    double gamma = 0.0; // axis skew (pixels)
    double u0 = 0.0;    // principal point x (pixels)
    double v0 = 0.0;    // principal point y (pixels)

    Eigen::Matrix3d matrix() const {
        Eigen::Matrix3d a;
        a << alpha, gamma, u0, 0.0, beta, v0, 0.0, 0.0, 1.0;
        return a;
    }

    bool invertible() const { return alpha != 0.0 && beta != 0.0; }
};

/// Rigid world-to-camera transform. The matrix and the axis-angle vector
/// always describe the same rotation; construct through the factories to
/// keep them in sync.
struct Extrinsics {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d rotation_vec = Eigen::Vector3d::Zero();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    static Extrinsics from_rotation_vec(const Eigen::Vector3d &rvec, const Eigen::Vector3d &t);
    static Extrinsics from_matrix(const Eigen::Matrix3d &rot, const Eigen::Vector3d &t);
};

} // namespace calib
