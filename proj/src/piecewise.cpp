#include "calib/piecewise.hpp"

#include "calib/undistort.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace calib {

namespace {
constexpr double kPoleTol = 1e-14;

double segment_rho(FnKind base, double r) { return base == FnKind::T6 ? r * r : r; }
} // namespace

std::vector<ProfileSegment> coeffs_from_knots(std::span<const double> knot_values,
                                              std::span<const double> breakpoints,
                                              FnKind base_kind) {
    if (base_kind != FnKind::T5 && base_kind != FnKind::T6) {
        throw Error("piecewise profiles are built from function kind 5 or 6");
    }
    if (knot_values.empty() || knot_values.size() != breakpoints.size()) {
        throw InvalidKnot("knot values and breakpoints must be non-empty and equal-sized");
    }
    double prev_r = 0.0;
    for (std::size_t i = 0; i < knot_values.size(); ++i) {
        if (!(knot_values[i] > 0.0)) {
            throw InvalidKnot("knot value " + std::to_string(i + 1) + " is not positive");
        }
        if (!(breakpoints[i] > prev_r)) {
            throw InvalidKnot("breakpoints are not strictly increasing and positive");
        }
        prev_r = breakpoints[i];
    }

    std::vector<ProfileSegment> segments(knot_values.size());
    double inv_prev = 1.0; // 1/g_0 with g_0 = f(0) = 1
    double rho_prev = 0.0;
    for (std::size_t i = 0; i < knot_values.size(); ++i) {
        const double inv_cur = 1.0 / knot_values[i];
        const double rho_cur = segment_rho(base_kind, breakpoints[i]);
        segments[i].k = (inv_cur - inv_prev) / (rho_cur - rho_prev);
        segments[i].a = inv_prev - segments[i].k * rho_prev;
        inv_prev = inv_cur;
        rho_prev = rho_cur;
    }
    return segments;
}

PiecewiseProfile::PiecewiseProfile(FnKind base_kind, std::span<const double> knot_values,
                                   double r_max)
    : base_kind_(base_kind), knot_values_(knot_values.begin(), knot_values.end()) {
    const std::size_t s = knot_values.size();
    if (s < 1 || s > 3) {
        throw InvalidKnot("piecewise profiles support 1 to 3 segments");
    }
    breakpoints_.resize(s);
    for (std::size_t i = 0; i < s; ++i) {
        breakpoints_[i] = static_cast<double>(i + 1) * r_max / static_cast<double>(s);
    }
    segments_ = coeffs_from_knots(knot_values_, breakpoints_, base_kind_);
}

int PiecewiseProfile::segment_index(double r) const {
    const int s = segment_count();
    for (int i = 0; i < s - 1; ++i) {
        if (r <= breakpoints_[static_cast<std::size_t>(i)]) {
            return i;
        }
    }
    return s - 1;
}

std::pair<double, double> PiecewiseProfile::segment_interval(int i) const {
    const double lo = (i == 0) ? 0.0 : breakpoints_[static_cast<std::size_t>(i - 1)];
    const double hi = (i == segment_count() - 1) ? std::numeric_limits<double>::infinity()
                                                 : breakpoints_[static_cast<std::size_t>(i)];
    return {lo, hi};
}

double PiecewiseProfile::eval(double r) const {
    const ProfileSegment &seg = segments_[static_cast<std::size_t>(segment_index(r))];
    const double den = seg.a + seg.k * rho(r);
    if (std::abs(den) < kPoleTol) {
        throw PoleAtRadius("piecewise profile has a pole at r = " + std::to_string(r));
    }
    return 1.0 / den;
}

double PiecewiseProfile::eval_deriv(double r) const {
    const ProfileSegment &seg = segments_[static_cast<std::size_t>(segment_index(r))];
    const double den = seg.a + seg.k * rho(r);
    if (std::abs(den) < kPoleTol) {
        throw PoleAtRadius("piecewise profile has a pole at r = " + std::to_string(r));
    }
    const double drho = base_kind_ == FnKind::T6 ? 2.0 * r : 1.0;
    return -seg.k * drho / (den * den);
}

NormalizedPoint distort_piecewise(const NormalizedPoint &p, const GeometricPiecewiseModel &model) {
    const double r = p.radius();
    return {p.x * model.profile_x.eval(r), p.y * model.profile_y.eval(r)};
}

NormalizedPoint undistort_piecewise(const NormalizedPoint &p_d,
                                    const GeometricPiecewiseModel &model) {
    if (p_d.x == 0.0 && p_d.y == 0.0) {
        return {0.0, 0.0};
    }
    const PiecewiseProfile &px = model.profile_x;
    const PiecewiseProfile &py = model.profile_y;
    const double r_d = p_d.radius();
    const bool quadratic = px.base_kind() == FnKind::T6;
    // Interval membership tolerance: roots on a shared knot belong to both
    // neighbours and must not fall through the gap.
    const double edge_tol = 1e-9 * (1.0 + px.r_max());

    double best_r = std::numeric_limits<double>::quiet_NaN();
    int best_seg = -1;
    double best_dist = std::numeric_limits<double>::infinity();

    for (int i = 0; i < px.segment_count(); ++i) {
        const ProfileSegment &sx = px.segments()[static_cast<std::size_t>(i)];
        const ProfileSegment &sy = py.segments()[static_cast<std::size_t>(i)];
        const auto [lo, hi] = px.segment_interval(i);

        QuadraticRoots roots{};
        try {
            roots = quadratic
                        ? detail::quadratic_gain_radii(p_d.x, p_d.y, sx.a, sx.k, sy.a, sy.k)
                        : detail::linear_gain_radii(p_d.x, p_d.y, sx.a, sx.k, sy.a, sy.k);
        } catch (const NoRealRoot &) {
            continue;
        }
        const auto consider = [&](double root) {
            double r = root;
            if (quadratic) {
                if (root < 0.0) {
                    return;
                }
                r = std::sqrt(root);
            }
            if (r < lo - edge_tol || r > hi + edge_tol) {
                return;
            }
            const double dist = std::abs(r - r_d);
            if (dist < best_dist - 1e-15 ||
                (std::abs(dist - best_dist) <= 1e-15 && r >= 0.0 && best_r < 0.0)) {
                best_dist = dist;
                best_r = r;
                best_seg = i;
            }
        };
        consider(roots.first);
        if (roots.second) {
            consider(*roots.second);
        }
    }
    if (best_seg < 0) {
        throw NoRealRoot("no segment admits a consistent undistorted radius");
    }
    const ProfileSegment &sx = px.segments()[static_cast<std::size_t>(best_seg)];
    const ProfileSegment &sy = py.segments()[static_cast<std::size_t>(best_seg)];
    const double rho = quadratic ? best_r * best_r : best_r;
    return {p_d.x * (sx.a + sx.k * rho), p_d.y * (sy.a + sy.k * rho)};
}

double update_r_max(std::span<const double> radii) {
    if (radii.empty()) {
        throw EmptyDataset("no radii to take the maximum over");
    }
    return *std::max_element(radii.begin(), radii.end());
}

} // namespace calib
