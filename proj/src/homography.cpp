#include "calib/homography.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace calib {

namespace {

// Isotropic normalization: centroid to the origin, mean distance sqrt(2).
Eigen::Matrix3d normalizing_transform(std::span<const PlanarCorrespondence> pts, bool image_side) {
    double mx = 0.0, my = 0.0;
    for (const auto &p : pts) {
        mx += image_side ? p.u : p.X;
        my += image_side ? p.v : p.Y;
    }
    const double n = static_cast<double>(pts.size());
    mx /= n;
    my /= n;
    double mean_dist = 0.0;
    for (const auto &p : pts) {
        const double dx = (image_side ? p.u : p.X) - mx;
        const double dy = (image_side ? p.v : p.Y) - my;
        mean_dist += std::hypot(dx, dy);
    }
    mean_dist /= n;
    const double s = (mean_dist < 1e-12) ? 1.0 : std::sqrt(2.0) / mean_dist;
    Eigen::Matrix3d t;
    t << s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0;
    return t;
}

Eigen::Matrix<double, 6, 1> conic_row(const Eigen::Matrix3d &h, int i, int j) {
    Eigen::Matrix<double, 6, 1> v;
    v << h(0, i) * h(0, j), h(0, i) * h(1, j) + h(1, i) * h(0, j), h(1, i) * h(1, j),
        h(2, i) * h(0, j) + h(0, i) * h(2, j), h(2, i) * h(1, j) + h(1, i) * h(2, j),
        h(2, i) * h(2, j);
    return v;
}

} // namespace

Eigen::Matrix3d estimate_homography(std::span<const PlanarCorrespondence> correspondences) {
    const std::size_t n = correspondences.size();
    if (n < 4) {
        throw DegenerateConfiguration("homography estimation needs at least 4 correspondences");
    }
    const Eigen::Matrix3d t_world = normalizing_transform(correspondences, false);
    const Eigen::Matrix3d t_image = normalizing_transform(correspondences, true);

    Eigen::MatrixXd design(2 * n, 9);
    for (std::size_t i = 0; i < n; ++i) {
        const auto &c = correspondences[i];
        const Eigen::Vector3d w = t_world * Eigen::Vector3d(c.X, c.Y, 1.0);
        const Eigen::Vector3d m = t_image * Eigen::Vector3d(c.u, c.v, 1.0);
        const double X = w.x() / w.z(), Y = w.y() / w.z();
        const double u = m.x() / m.z(), v = m.y() / m.z();
        design.row(static_cast<Eigen::Index>(2 * i)) << -X, -Y, -1.0, 0.0, 0.0, 0.0, u * X, u * Y,
            u;
        design.row(static_cast<Eigen::Index>(2 * i + 1)) << 0.0, 0.0, 0.0, -X, -Y, -1.0, v * X,
            v * Y, v;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(design, Eigen::ComputeFullV);
    const auto &sv = svd.singularValues();
    // A homography has one null direction; a second vanishing singular value
    // means the configuration does not determine H.
    if (sv(7) < 1e-10 * sv(0)) {
        throw DegenerateConfiguration("correspondences do not determine a homography");
    }
    const Eigen::Matrix<double, 9, 1> h = svd.matrixV().col(8);
    Eigen::Matrix3d hn;
    hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    Eigen::Matrix3d homography = t_image.inverse() * hn * t_world;
    if (std::abs(homography(2, 2)) > 1e-12) {
        homography /= homography(2, 2);
    }
    return homography;
}

Intrinsics intrinsics_from_homographies(std::span<const Eigen::Matrix3d> homographies,
                                        bool fix_skew) {
    const std::size_t n = homographies.size();
    const std::size_t min_views = fix_skew ? 2 : 3;
    if (n < min_views) {
        throw InsufficientViews("intrinsics estimation needs at least " +
                                std::to_string(min_views) + " views, got " + std::to_string(n));
    }

    const Eigen::Index rows = static_cast<Eigen::Index>(2 * n + (fix_skew ? 1 : 0));
    Eigen::MatrixXd v(rows, 6);
    for (std::size_t i = 0; i < n; ++i) {
        v.row(static_cast<Eigen::Index>(2 * i)) = conic_row(homographies[i], 0, 1).transpose();
        v.row(static_cast<Eigen::Index>(2 * i + 1)) =
            (conic_row(homographies[i], 0, 0) - conic_row(homographies[i], 1, 1)).transpose();
    }
    if (fix_skew) {
        // B12 = 0; weight comparable to the data rows.
        Eigen::Matrix<double, 1, 6> row;
        row << 0.0, 1.0, 0.0, 0.0, 0.0, 0.0;
        v.row(rows - 1) = row;
    }

    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(v, Eigen::ComputeFullV);
    Eigen::Matrix<double, 6, 1> b = svd.matrixV().col(5);
    if (b(0) < 0.0) {
        b = -b; // the conic is defined up to sign; B11 must be positive
    }

    const double b11 = b(0), b12 = b(1), b22 = b(2), b13 = b(3), b23 = b(4), b33 = b(5);
    const double denom = b11 * b22 - b12 * b12;
    if (b11 <= 0.0 || denom <= 0.0) {
        throw IllConditioned("absolute-conic estimate is not positive definite");
    }
    const double v0 = (b12 * b13 - b11 * b23) / denom;
    const double lambda = b33 - (b13 * b13 + v0 * (b12 * b13 - b11 * b23)) / b11;
    if (lambda <= 0.0) {
        throw IllConditioned("absolute-conic estimate has non-positive scale");
    }
    Intrinsics intr;
    intr.alpha = std::sqrt(lambda / b11);
    intr.beta = std::sqrt(lambda * b11 / denom);
    intr.gamma = fix_skew ? 0.0 : -b12 * intr.alpha * intr.alpha * intr.beta / lambda;
    intr.u0 = intr.gamma * v0 / intr.beta - b13 * intr.alpha * intr.alpha / lambda;
    intr.v0 = v0;
    return intr;
}

Extrinsics extrinsics_from_homography(const Eigen::Matrix3d &homography, const Intrinsics &intr) {
    if (!intr.invertible()) {
        throw SingularIntrinsics("camera matrix is singular");
    }
    const Eigen::Matrix3d a_inv = intr.matrix().inverse();

    Eigen::Matrix3d h = homography;
    const Eigen::Vector3d t_dir = a_inv * h.col(2);
    if (t_dir.z() < 0.0) {
        h = -h; // H is defined up to sign; the target must be in front
    }

    const Eigen::Vector3d r1p = a_inv * h.col(0);
    const double scale = 1.0 / std::max(r1p.norm(), 1e-300);
    const Eigen::Vector3d r1 = scale * r1p;
    const Eigen::Vector3d r2 = scale * (a_inv * h.col(1));
    const Eigen::Vector3d r3 = r1.cross(r2);

    Eigen::Matrix3d rot;
    rot.col(0) = r1;
    rot.col(1) = r2;
    rot.col(2) = r3;
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(rot, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rot = svd.matrixU() * svd.matrixV().transpose();
    if (rot.determinant() < 0.0) {
        Eigen::Matrix3d u = svd.matrixU();
        u.col(2) *= -1.0;
        rot = u * svd.matrixV().transpose();
    }
    return Extrinsics::from_matrix(rot, scale * (a_inv * h.col(2)));
}

} // namespace calib
