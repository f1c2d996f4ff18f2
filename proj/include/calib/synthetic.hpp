#pragma once

#include "calib/calibrate.hpp"

#include <cstdint>
#include <optional>

namespace calib {

/// Explicit camera pose for one simulated view.
struct PoseSpec {
    Eigen::Vector3d rotation_vec = Eigen::Vector3d::Zero();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Ranges for randomized poses. Each view gets tilt angles about the x and y
/// axes, a twist about the optical axis, a viewing distance, and a lateral
/// offset of the target center, all drawn from its own seed-derived
/// substream.
struct PoseRanges {
    double tilt_max_deg = 30.0;
    double twist_max_deg = 10.0;
    double distance_min = 9.0;
    double distance_max = 12.0;
    double offset_max = 0.8;
};

struct SimConfig {
    int grid_rows = 8;
    int grid_cols = 8;
    double square_size = 1.0;
    int views = 5;
    std::vector<PoseSpec> poses; // explicit poses (empty: randomized)
    PoseRanges ranges;
    Intrinsics intrinsics{500.0, 500.0, 0.0, 320.0, 240.0};
    DistortionModel model = DistortionModel::none();
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    int width = 640;
    int height = 480;
    double margin_px = 10.0;

    void validate() const;
};

/// Everything needed to score a fit against the generator.
struct SimTruth {
    Intrinsics intrinsics;
    std::vector<Extrinsics> extrinsics;
    DistortionModel model;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
};

struct SimResult {
    CalibrationDataset dataset;
    SimTruth truth;
};

/// Generate a planar-grid dataset: project every grid point per view, apply
/// the truth distortion, land in pixels, then add i.i.d. Gaussian pixel
/// noise. Explicit poses that push points outside the margin throw
/// PointOutOfFrame (with view and point index); randomized poses redraw
/// from their substream until the view fits. Piecewise truth models get
/// their r_max resolved from the generated geometry before distorting.
/// Output is a deterministic function of the config.
SimResult simulate(const SimConfig &config);

} // namespace calib
