#pragma once

#include "calib/distortion.hpp"

#include <span>
#include <vector>

namespace calib {

/// One rational segment 1/(a + k*rho), where rho is r for the linear base
/// kind (function 5) and r^2 for the quadratic one (function 6).
struct ProfileSegment {
    double a = 1.0;
    double k = 0.0;
};

/// Recover the segment coefficients from positive knot values g_i at
/// strictly increasing breakpoints r_i. The reciprocal of the profile is
/// continuous and piecewise linear in rho, pinned to 1 at rho = 0 and to
/// 1/g_i at each breakpoint, so the coefficients follow segment by segment:
///   k_i = (1/g_i - 1/g_{i-1}) / (rho_i - rho_{i-1}),  a_i = 1/g_{i-1} - k_i rho_{i-1}
/// with g_0 = 1, rho_0 = 0. Throws InvalidKnot on g_i <= 0 or disordered
/// breakpoints.
std::vector<ProfileSegment> coeffs_from_knots(std::span<const double> knot_values,
                                              std::span<const double> breakpoints,
                                              FnKind base_kind);

/// A piecewise-continuous distortion profile built from 1, 2, or 3 rational
/// segments over [0, r_max] with uniform breakpoints r_i = i * r_max / s.
/// The free parameters are the knot values g_i = f(r_i); the segment
/// coefficients are derived. f(0) = 1 exactly, and with s = 1 the profile
/// is the single catalog function with k = (1/g_1 - 1)/rho_1.
class PiecewiseProfile {
  public:
    PiecewiseProfile() = default;

    /// base_kind must be T5 or T6; knot values must all be positive.
    PiecewiseProfile(FnKind base_kind, std::span<const double> knot_values, double r_max);

    double eval(double r) const;
    double eval_deriv(double r) const;

    /// Segment index covering radius r. Radii above r_max evaluate the last
    /// segment (extrapolation keeps the objective continuous while r_max is
    /// still moving during refinement).
    int segment_index(double r) const;

    FnKind base_kind() const { return base_kind_; }
    int segment_count() const { return static_cast<int>(segments_.size()); }
    double r_max() const { return breakpoints_.empty() ? 0.0 : breakpoints_.back(); }
    const std::vector<double> &knot_values() const { return knot_values_; }
    const std::vector<double> &breakpoints() const { return breakpoints_; }
    const std::vector<ProfileSegment> &segments() const { return segments_; }

    /// Breakpoint interval [lo, hi] of segment i (hi unbounded for the last
    /// segment so extrapolated radii stay attributable).
    std::pair<double, double> segment_interval(int i) const;

  private:
    double rho(double r) const { return base_kind_ == FnKind::T6 ? r * r : r; }

    FnKind base_kind_ = FnKind::T5;
    std::vector<double> knot_values_;
    std::vector<double> breakpoints_;
    std::vector<ProfileSegment> segments_;
};

/// Two-axis piecewise model; the profiles share the base kind, segment
/// count, and breakpoints, and differ only in their knot values.
struct GeometricPiecewiseModel {
    PiecewiseProfile profile_x;
    PiecewiseProfile profile_y;

    GeometricPiecewiseModel() = default;
    GeometricPiecewiseModel(FnKind base_kind, std::span<const double> knots_x,
                            std::span<const double> knots_y, double r_max)
        : profile_x(base_kind, knots_x, r_max), profile_y(base_kind, knots_y, r_max) {}
};

/// Forward distortion: x_d = x * fx(r), y_d = y * fy(r).
NormalizedPoint distort_piecewise(const NormalizedPoint &p, const GeometricPiecewiseModel &model);

/// Exact inversion. Each segment contributes its quadratic candidates; a
/// candidate survives only if the recovered radius lies in that segment's
/// interval, and the survivor closest to r_d wins.
NormalizedPoint undistort_piecewise(const NormalizedPoint &p_d,
                                    const GeometricPiecewiseModel &model);

/// Largest radius over the current feature set; the piecewise breakpoints
/// rescale from it every refinement iteration. Throws EmptyDataset.
double update_r_max(std::span<const double> radii);

} // namespace calib
