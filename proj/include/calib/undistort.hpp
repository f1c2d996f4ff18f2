#pragma once

#include "calib/distortion.hpp"

#include <optional>

namespace calib {

/// Both real roots of a*x^2 + b*x + c = 0, computed with the numerically
/// stable split. When |a| < 1e-14 the equation degrades to the linear root
/// (second slot empty); when b also vanishes there is no root to fall back
/// on and DegenerateQuadratic is thrown. NoRealRoot on negative discriminant.
struct QuadraticRoots {
    double first = 0.0;
    std::optional<double> second;
};
QuadraticRoots solve_quadratic(double a, double b, double c);

/// Closed-form inversion of the two-axis T5/T6 map (UD formulations only).
/// T5 solves the quadratic in r obtained from
///   x_d^2 (1 + k1 r)^2 + y_d^2 (1 + k2 r)^2 = r^2,
/// T6 the analogous quadratic in rbar = r^2. Of the two roots the one
/// closer to r_d is kept (ties toward the nonnegative root); T6 roots with
/// rbar < 0 are discarded before the square root.
NormalizedPoint undistort_analytic(const NormalizedPoint &p_d, const GeometricModel &model);

/// Iterative inversion for any catalog kind: solves
///   x_d^2 / f(r,k1)^2 + y_d^2 / f(r,k2)^2 = r^2
/// by Newton iteration safeguarded with bisection on [0, 4 r_d + 1],
/// starting from r = r_d. Tolerance 1e-12 on the scalar residual, at most
/// 100 iterations; throws NoConvergence (carrying the last residual)
/// otherwise.
NormalizedPoint undistort_iterative(const NormalizedPoint &p_d, const GeometricModel &model,
                                    double tol = 1e-12, int max_iter = 100);

/// One-shot approximation r = r_d f(r_d, -k), applied per axis with the
/// negated coefficients. No convergence guarantee; the error grows with the
/// coefficient magnitude.
NormalizedPoint undistort_approx(const NormalizedPoint &p_d, const GeometricModel &model);

/// Value and derivative of a per-axis gain at some radius.
struct GainEval {
    double value = 1.0;
    double deriv = 0.0;
};

namespace detail {

/// Candidate undistorted radii where both axis gains are 1/(a + k r):
/// roots of px^2 (a1 + k1 r)^2 + py^2 (a2 + k2 r)^2 = r^2.
QuadraticRoots linear_gain_radii(double px, double py, double a1, double k1, double a2, double k2);

/// Candidate rbar = r^2 where both axis gains are 1/(a + k r^2):
/// roots of px^2 (a1 + k1 rbar)^2 + py^2 (a2 + k2 rbar)^2 = rbar.
QuadraticRoots quadratic_gain_radii(double px, double py, double a1, double k1, double a2,
                                    double k2);

} // namespace detail

/// Scalar core shared by undistort_iterative and the inversion of the
/// distorted-to-undistorted map: finds r >= 0 with
///   px^2 / f1(r)^2 + py^2 / f2(r)^2 = r^2
/// where the callables return each axis gain with its derivative. r0 seeds
/// Newton and sets the bracket [0, 4 r0 + 1].
template <typename GainX, typename GainY>
double solve_scaled_radius(double px, double py, GainX f1, GainY f2, double r0,
                           double tol = 1e-12, int max_iter = 100);

// --- implementation ---

template <typename GainX, typename GainY>
double solve_scaled_radius(double px, double py, GainX f1, GainY f2, double r0, double tol,
                           int max_iter) {
    const double px2 = px * px;
    const double py2 = py * py;
    if (px2 + py2 == 0.0) {
        return 0.0;
    }
    // residual G(r) = px^2/f1^2 + py^2/f2^2 - r^2 and its derivative.
    const auto probe = [&](double r) {
        const GainEval g1 = f1(r);
        const GainEval g2 = f2(r);
        GainEval out;
        out.value = px2 / (g1.value * g1.value) + py2 / (g2.value * g2.value) - r * r;
        out.deriv = -2.0 * px2 * g1.deriv / (g1.value * g1.value * g1.value) -
                    2.0 * py2 * g2.deriv / (g2.value * g2.value * g2.value) - 2.0 * r;
        return out;
    };

    // Bracket the first crossing. G(0) = px^2 + py^2 > 0, and with the
    // physical root G turns negative right after it; rational gains can make
    // G positive again far out (their reciprocals grow polynomially), so the
    // limit is scanned rather than trusted as a one-point probe.
    const double limit = 4.0 * r0 + 1.0;
    double lo = 0.0;
    double hi = 0.0;
    bool bracketed = false;
    double last_value = px2 + py2;
    constexpr int kScanSamples = 64;
    for (int j = 1; j <= kScanSamples && !bracketed; ++j) {
        const double t = limit * j / kScanSamples;
        double value;
        try {
            value = probe(t).value;
        } catch (const PoleAtRadius &) {
            continue;
        }
        if (value <= 0.0) {
            hi = t;
            bracketed = true;
        } else {
            lo = t;
            last_value = value;
        }
    }
    if (!bracketed) {
        throw NoConvergence("radius equation has no sign change on the search bracket",
                            last_value);
    }

    double r = std::clamp(r0, lo, hi);
    GainEval cur;
    try {
        cur = probe(r);
    } catch (const PoleAtRadius &) {
        r = 0.5 * (lo + hi);
        cur = probe(r);
    }
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(cur.value) < tol) {
            return r;
        }
        if (cur.value > 0.0) {
            lo = r;
        } else {
            hi = r;
        }
        double next = (cur.deriv != 0.0) ? r - cur.value / cur.deriv : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        r = next;
        try {
            cur = probe(r);
        } catch (const PoleAtRadius &) {
            r = 0.5 * (lo + hi);
            cur = probe(r);
        }
    }
    if (std::abs(cur.value) < tol) {
        return r;
    }
    throw NoConvergence("radius iteration did not converge", cur.value);
}

} // namespace calib
