#pragma once

#include "calib/distortion.hpp"
#include "calib/geometry.hpp"
#include "calib/piecewise.hpp"

#include <span>
#include <string>
#include <vector>

namespace calib {

/// Which distortion family a calibration run fits.
enum class ModelMode {
    None,        // pure pinhole
    Radial,      // same f(r, k) on both axes
    Geometric,   // independent k1/k2 per axis (UD direction)
    DU,          // distorted-to-undistorted two-axis model
    Piecewise,   // knot-parameterized piecewise profiles (kinds 5/6)
    Decentering, // six-coefficient radial + tangential pixel model
};

const char *model_mode_name(ModelMode mode);
ModelMode model_mode_from_name(const std::string &name);

/// A distortion model instance: configuration plus current coefficients.
/// k1 holds the x-axis coefficients (the only vector for Radial and
/// Decentering); k2 the y-axis ones. For Piecewise they are the knot values
/// and r_max completes the profile.
struct DistortionModel {
    ModelMode mode = ModelMode::None;
    FnKind fn = FnKind::T2;
    std::size_t poly_terms = 0;                             // for fn == PolyEven
    Formulation formulation = Formulation::UDNormalized;    // Geometric/Radial UD pairs
    int segments = 1;                                       // Piecewise
    bool decentering_pixel_radius = false;

    std::vector<double> k1;
    std::vector<double> k2;
    double r_max = 1.0;

    /// Number of free parameters the optimizer sees.
    std::size_t param_count() const;

    /// Coefficients at which the model applies no distortion (zeros; knot
    /// values one).
    void reset_params();

    void set_params(std::span<const double> params);
    void get_params(std::span<double> params) const;

    std::string describe() const;

    static DistortionModel none();
    static DistortionModel radial(FnKind fn, std::size_t poly_terms = 0);
    static DistortionModel geometric(FnKind fn, std::size_t poly_terms = 0,
                                     Formulation formulation = Formulation::UDNormalized);
    static DistortionModel du(FnKind fn, std::size_t poly_terms = 0);
    static DistortionModel piecewise(FnKind base, int segments);
    static DistortionModel decentering();
};

/// Prepared forward map from an undistorted normalized point to the
/// distorted pixel. Building one resolves the piecewise profiles once, so
/// evaluation over a dataset does not re-derive segment coefficients per
/// point.
class ModelEvaluator {
  public:
    ModelEvaluator(const DistortionModel &model, const Intrinsics &intr);

    /// The model's prediction for the observed (distorted) pixel of an
    /// undistorted normalized projection.
    PixelPoint distorted_pixel(const NormalizedPoint &undistorted) const;

    /// Per-axis scalar gain at radius r (profile or function evaluation);
    /// axis 0 = x, 1 = y. For Decentering this is the radial factor.
    double axis_gain(int axis, double r) const;

  private:
    PixelPoint invert_du(const NormalizedPoint &p, const std::vector<double> &kx,
                         const std::vector<double> &ky) const;

    const DistortionModel &model_;
    Intrinsics intr_;
    GeometricPiecewiseModel piecewise_;
    GeometricModel geometric_; // reused for Radial/Geometric/DU
};

/// Inverse of the model's forward map in normalized coordinates (Radial,
/// Geometric, Piecewise; DU is already distorted-to-undistorted and applies
/// directly). method: "analytic", "iterative", or "approx".
NormalizedPoint undistort_model(const DistortionModel &model, const NormalizedPoint &distorted,
                                const std::string &method);

} // namespace calib
