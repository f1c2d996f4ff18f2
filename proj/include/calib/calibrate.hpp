#pragma once

#include "calib/homography.hpp"
#include "calib/model.hpp"

#include <Eigen/Core>
#include <functional>
#include <optional>
#include <vector>

namespace calib {

/// One observed correspondence: a planar world point (Z = 0) and the pixel
/// where it was detected (distortion included).
struct Observation {
    int id = 0;
    double X = 0.0;
    double Y = 0.0;
    PixelPoint image;
};

struct CalibrationView {
    std::vector<Observation> points;
};

struct CalibrationDataset {
    int width = 0;
    int height = 0;
    std::vector<CalibrationView> views;

    std::size_t total_points() const;
    /// Checks view/point counts (>= 4 points per view, >= 2 views) and
    /// non-collinear world points. Throws on violation.
    void validate(bool fix_skew = false) const;
};

struct CalibrationReport {
    Intrinsics intrinsics;
    std::vector<Extrinsics> extrinsics;
    DistortionModel model;
    double j_initial = 0.0;
    double j_final = 0.0;
    double rms = 0.0; // per-coordinate: sqrt(J / residual-count)
    std::vector<double> per_point_residuals; // pixel distance per point
    int iterations = 0;
    bool converged = false;
};

/// Optimizer parameter order: [alpha, gamma, beta, u0, v0 | per view
/// rotation vec + translation | distortion coefficients]. Length
/// 5 + 6 N + model.param_count().
Eigen::VectorXd pack_parameters(const Intrinsics &intr, std::span<const Extrinsics> extrinsics,
                                const DistortionModel &model);
void unpack_parameters(const Eigen::VectorXd &params, Intrinsics &intr,
                       std::vector<Extrinsics> &extrinsics, DistortionModel &model);

/// Sum of squared pixel reprojection errors over all views and points,
/// optionally filling the stacked residual vector (length 2 N n).
/// Propagates model evaluation errors (PoleAtRadius, ...).
double compute_j(const Intrinsics &intr, std::span<const Extrinsics> extrinsics,
                 const DistortionModel &model, const CalibrationDataset &dataset,
                 std::vector<double> *residuals = nullptr);

/// compute_j on a packed parameter vector.
double compute_j(const Eigen::VectorXd &params, const DistortionModel &model_spec,
                 const CalibrationDataset &dataset, std::vector<double> *residuals = nullptr);

struct IterationInfo {
    int iteration = 0;
    double j = 0.0;
    double r_max = 0.0; // piecewise runs only; otherwise 0
};

struct RefineOptions {
    int max_iterations = 120;
    double tol_x = 1e-5;   // stop when an accepted step has |dx|_inf below this
    double tol_fun = 1e-5; // stop when the relative J decrease falls below this
    bool fix_skew = false;
    std::function<void(const IterationInfo &)> on_iteration;
};

/// Damped least-squares refinement of every parameter from the given
/// initialization. The distortion coefficients in `model` are taken as the
/// starting point (zero / unit knots for a fresh fit). For piecewise models
/// r_max is recomputed from the current pose estimates before each outer
/// iteration. Model evaluation failures during trial steps turn into large
/// per-point penalty residuals so the step is rejected rather than aborting.
CalibrationReport refine(const CalibrationDataset &dataset, const DistortionModel &model,
                         const Intrinsics &init_intr, std::span<const Extrinsics> init_extr,
                         const RefineOptions &options = {});

/// Full pipeline: per-view DLT homographies, closed-form intrinsics and
/// extrinsics, then refine with the distortion coefficients at their
/// no-distortion values.
CalibrationReport calibrate(const CalibrationDataset &dataset, DistortionModel model,
                            const RefineOptions &options = {});

/// Normalized projection radii of every point under the given poses (the
/// feature radii that drive the piecewise r_max).
std::vector<double> projection_radii(const CalibrationDataset &dataset,
                                     std::span<const Extrinsics> extrinsics);

} // namespace calib
