#include "calib/undistort.hpp"

#include <cmath>
#include <limits>

namespace calib {

namespace {
constexpr double kDegenerateTol = 1e-14;
}

QuadraticRoots solve_quadratic(double a, double b, double c) {
    if (std::abs(a) < kDegenerateTol) {
        if (std::abs(b) < kDegenerateTol) {
            throw DegenerateQuadratic("quadratic has vanishing leading and linear coefficients");
        }
        return {-c / b, std::nullopt};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) {
        throw NoRealRoot("quadratic discriminant is negative");
    }
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
    const double r1 = q / a;
    const double r2 = (q != 0.0) ? c / q : -b / a - r1;
    return {r1, r2};
}

namespace detail {

QuadraticRoots linear_gain_radii(double px, double py, const double a1, const double k1,
                                 const double a2, const double k2) {
    const double px2 = px * px, py2 = py * py;
    return solve_quadratic(px2 * k1 * k1 + py2 * k2 * k2 - 1.0,
                           2.0 * (px2 * a1 * k1 + py2 * a2 * k2), px2 * a1 * a1 + py2 * a2 * a2);
}

QuadraticRoots quadratic_gain_radii(double px, double py, const double a1, const double k1,
                                    const double a2, const double k2) {
    const double px2 = px * px, py2 = py * py;
    return solve_quadratic(px2 * k1 * k1 + py2 * k2 * k2,
                           2.0 * (px2 * a1 * k1 + py2 * a2 * k2) - 1.0,
                           px2 * a1 * a1 + py2 * a2 * a2);
}

} // namespace detail

NormalizedPoint undistort_analytic(const NormalizedPoint &p_d, const GeometricModel &model) {
    if (model.fn_kind != FnKind::T5 && model.fn_kind != FnKind::T6) {
        throw Error("analytic undistortion requires function kind 5 or 6");
    }
    if (model.formulation == Formulation::DU) {
        throw Error("analytic undistortion applies to the UD formulations");
    }
    if (p_d.x == 0.0 && p_d.y == 0.0) {
        return {0.0, 0.0};
    }
    const double r_d = p_d.radius();
    const double k1 = model.k1.at(0);
    const double k2 = model.k2.at(0);

    double best_r = std::numeric_limits<double>::quiet_NaN();
    double best_dist = std::numeric_limits<double>::infinity();
    const auto consider = [&](double r) {
        const double dist = std::abs(r - r_d);
        if (dist < best_dist - 1e-15 ||
            (std::abs(dist - best_dist) <= 1e-15 && r >= 0.0 && best_r < 0.0)) {
            best_dist = dist;
            best_r = r;
        }
    };

    if (model.fn_kind == FnKind::T5) {
        const QuadraticRoots roots = detail::linear_gain_radii(p_d.x, p_d.y, 1.0, k1, 1.0, k2);
        consider(roots.first);
        if (roots.second) {
            consider(*roots.second);
        }
        if (!std::isfinite(best_r)) {
            throw NoRealRoot("no real undistorted radius");
        }
        return {p_d.x * (1.0 + k1 * best_r), p_d.y * (1.0 + k2 * best_r)};
    }

    const QuadraticRoots roots = detail::quadratic_gain_radii(p_d.x, p_d.y, 1.0, k1, 1.0, k2);
    // rbar = r^2 by definition; negative roots carry no radius.
    if (roots.first >= 0.0) {
        consider(std::sqrt(roots.first));
    }
    if (roots.second && *roots.second >= 0.0) {
        consider(std::sqrt(*roots.second));
    }
    if (!std::isfinite(best_r)) {
        throw NoRealRoot("no nonnegative squared radius among the quadratic roots");
    }
    const double rbar = best_r * best_r;
    return {p_d.x * (1.0 + k1 * rbar), p_d.y * (1.0 + k2 * rbar)};
}

NormalizedPoint undistort_iterative(const NormalizedPoint &p_d, const GeometricModel &model,
                                    double tol, int max_iter) {
    if (p_d.x == 0.0 && p_d.y == 0.0) {
        return {0.0, 0.0};
    }
    const auto gain = [&](const std::vector<double> &k) {
        return [&model, &k](double r) {
            GainEval g;
            g.value = eval_fn(model.fn_kind, k, r);
            g.deriv = eval_fn_deriv(model.fn_kind, k, r);
            return g;
        };
    };
    const double r = solve_scaled_radius(p_d.x, p_d.y, gain(model.k1), gain(model.k2),
                                         p_d.radius(), tol, max_iter);
    const double f1 = eval_fn(model.fn_kind, model.k1, r);
    const double f2 = eval_fn(model.fn_kind, model.k2, r);
    return {p_d.x / f1, p_d.y / f2};
}

NormalizedPoint undistort_approx(const NormalizedPoint &p_d, const GeometricModel &model) {
    const double r_d = p_d.radius();
    std::vector<double> neg1(model.k1.size());
    std::vector<double> neg2(model.k2.size());
    for (std::size_t i = 0; i < neg1.size(); ++i) {
        neg1[i] = -model.k1[i];
    }
    for (std::size_t i = 0; i < neg2.size(); ++i) {
        neg2[i] = -model.k2[i];
    }
    return {p_d.x * eval_fn(model.fn_kind, neg1, r_d), p_d.y * eval_fn(model.fn_kind, neg2, r_d)};
}

} // namespace calib
