#include "calib/distortion.hpp"

#include "calib/geometry.hpp"

#include <cmath>
#include <cstdlib>

namespace calib {

namespace {
constexpr double kPoleTol = 1e-14;
}

std::size_t coeff_count(FnKind kind, std::size_t poly_terms) {
    switch (kind) {
    case FnKind::T1:
    case FnKind::T2:
    case FnKind::T5:
    case FnKind::T6:
        return 1;
    case FnKind::T3:
    case FnKind::T4:
    case FnKind::T7:
    case FnKind::T8:
        return 2;
    case FnKind::T9:
    case FnKind::T10:
        return 3;
    case FnKind::PolyEven:
        return poly_terms;
    case FnKind::GeneralRational:
        return 5;
    case FnKind::Decentering:
        return 6;
    }
    return 0;
}

const char *fn_kind_name(FnKind kind) {
    switch (kind) {
    case FnKind::T1: return "1";
    case FnKind::T2: return "2";
    case FnKind::T3: return "3";
    case FnKind::T4: return "4";
    case FnKind::T5: return "5";
    case FnKind::T6: return "6";
    case FnKind::T7: return "7";
    case FnKind::T8: return "8";
    case FnKind::T9: return "9";
    case FnKind::T10: return "10";
    case FnKind::PolyEven: return "poly";
    case FnKind::GeneralRational: return "rational";
    case FnKind::Decentering: return "heikkila";
    }
    return "?";
}

FnKind fn_kind_from_name(const std::string &name, std::size_t *poly_terms) {
    if (poly_terms) {
        *poly_terms = 0;
    }
    if (name.rfind("poly", 0) == 0) {
        if (poly_terms && name.size() > 4) {
            *poly_terms = static_cast<std::size_t>(std::strtoul(name.c_str() + 4, nullptr, 10));
        }
        return FnKind::PolyEven;
    }
    if (name == "rational") {
        return FnKind::GeneralRational;
    }
    if (name == "heikkila") {
        return FnKind::Decentering;
    }
    const long id = std::strtol(name.c_str(), nullptr, 10);
    if (id >= 1 && id <= 10) {
        return static_cast<FnKind>(id - 1);
    }
    throw ParseError("unknown distortion function '" + name + "'");
}

RationalView rational_view(FnKind kind, std::span<const double> coeffs) {
    if (coeffs.size() != coeff_count(kind, coeffs.size())) {
        throw Error("coefficient count " + std::to_string(coeffs.size()) +
                    " does not match function kind " + fn_kind_name(kind));
    }
    RationalView rv;
    auto &num = rv.num;
    auto &den = rv.den;
    num.c[0] = 1.0;
    num.n = 1;
    den.c[0] = 1.0;
    den.n = 1;
    switch (kind) {
    case FnKind::T1:
        num.c[1] = coeffs[0];
        num.n = 2;
        break;
    case FnKind::T2:
        num.c[2] = coeffs[0];
        num.n = 3;
        break;
    case FnKind::T3:
        num.c[1] = coeffs[0];
        num.c[2] = coeffs[1];
        num.n = 3;
        break;
    case FnKind::T4:
        num.c[2] = coeffs[0];
        num.c[4] = coeffs[1];
        num.n = 5;
        break;
    case FnKind::T5:
        den.c[1] = coeffs[0];
        den.n = 2;
        break;
    case FnKind::T6:
        den.c[2] = coeffs[0];
        den.n = 3;
        break;
    case FnKind::T7:
        num.c[1] = coeffs[0];
        num.n = 2;
        den.c[2] = coeffs[1];
        den.n = 3;
        break;
    case FnKind::T8:
        den.c[1] = coeffs[0];
        den.c[2] = coeffs[1];
        den.n = 3;
        break;
    case FnKind::T9:
        num.c[1] = coeffs[0];
        num.n = 2;
        den.c[1] = coeffs[1];
        den.c[2] = coeffs[2];
        den.n = 3;
        break;
    case FnKind::T10:
        num.c[2] = coeffs[0];
        num.n = 3;
        den.c[1] = coeffs[1];
        den.c[2] = coeffs[2];
        den.n = 3;
        break;
    case FnKind::PolyEven:
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            num.c[2 * (i + 1)] = coeffs[i];
        }
        num.n = static_cast<int>(2 * coeffs.size() + 1);
        break;
    case FnKind::GeneralRational:
        num.c[1] = coeffs[0];
        num.c[2] = coeffs[1];
        num.n = 3;
        den.c[1] = coeffs[2];
        den.c[2] = coeffs[3];
        den.c[3] = coeffs[4];
        den.n = 4;
        break;
    case FnKind::Decentering:
        // Scalar part: the radial factor on the first three coefficients.
        num.c[2] = coeffs[0];
        num.c[4] = coeffs[1];
        num.c[6] = coeffs[2];
        num.n = 7;
        break;
    }
    return rv;
}

double eval_fn(FnKind kind, std::span<const double> coeffs, double r) {
    const RationalView rv = rational_view(kind, coeffs);
    const double den = rv.den.eval(r);
    if (std::abs(den) < kPoleTol) {
        throw PoleAtRadius("distortion function " + std::string(fn_kind_name(kind)) +
                           " has a pole at r = " + std::to_string(r));
    }
    return rv.num.eval(r) / den;
}

double eval_fn(const DistortionFn &fn, double r) { return eval_fn(fn.kind, fn.coeffs, r); }

double eval_fn_deriv(FnKind kind, std::span<const double> coeffs, double r) {
    const RationalView rv = rational_view(kind, coeffs);
    const double den = rv.den.eval(r);
    if (std::abs(den) < kPoleTol) {
        throw PoleAtRadius("distortion function " + std::string(fn_kind_name(kind)) +
                           " has a pole at r = " + std::to_string(r));
    }
    const double num = rv.num.eval(r);
    return (rv.num.eval_deriv(r) * den - num * rv.den.eval_deriv(r)) / (den * den);
}

NormalizedPoint distort_radial(const NormalizedPoint &p, const DistortionFn &fn) {
    const double f = eval_fn(fn, p.radius());
    return {p.x * f, p.y * f};
}

const char *formulation_name(Formulation f) {
    switch (f) {
    case Formulation::UDNormalized: return "ud-normalized";
    case Formulation::UDPixel: return "ud-pixel";
    case Formulation::DU: return "du";
    }
    return "?";
}

Formulation formulation_from_name(const std::string &name) {
    if (name == "ud-normalized" || name == "normalized") {
        return Formulation::UDNormalized;
    }
    if (name == "ud-pixel" || name == "pixel") {
        return Formulation::UDPixel;
    }
    if (name == "du") {
        return Formulation::DU;
    }
    throw ParseError("unknown formulation '" + name + "'");
}

NormalizedPoint distort_geometric(const NormalizedPoint &p, const GeometricModel &model,
                                  const Intrinsics &intr) {
    const double r = p.radius();
    const double f1 = eval_fn(model.fn_kind, model.k1, r);
    const double f2 = eval_fn(model.fn_kind, model.k2, r);
    if (model.formulation == Formulation::UDPixel) {
        return {p.x * f1 + intr.gamma / intr.alpha * p.y * (f1 - f2), p.y * f2};
    }
    return {p.x * f1, p.y * f2};
}

PixelPoint distort_geometric_pixel(const PixelPoint &p, const GeometricModel &model,
                                   const Intrinsics &intr) {
    const double r = pixel_to_normalized(p, intr).radius();
    const double f1 = eval_fn(model.fn_kind, model.k1, r);
    const double f2 = eval_fn(model.fn_kind, model.k2, r);
    const double ub = p.u - intr.u0;
    const double vb = p.v - intr.v0;
    return {intr.u0 + ub * f1 + intr.gamma / intr.beta * vb * (f2 - f1), intr.v0 + vb * f2};
}

PixelPoint distort_axis_pixel(const PixelPoint &p, const GeometricModel &model,
                              const Intrinsics &intr) {
    const double r = pixel_to_normalized(p, intr).radius();
    const double f1 = eval_fn(model.fn_kind, model.k1, r);
    const double f2 = eval_fn(model.fn_kind, model.k2, r);
    return {intr.u0 + (p.u - intr.u0) * f1, intr.v0 + (p.v - intr.v0) * f2};
}

NormalizedPoint distort_du(const NormalizedPoint &p_d, const GeometricModel &model) {
    const double r_d = p_d.radius();
    const double f1 = eval_fn(model.fn_kind, model.k1, r_d);
    const double f2 = eval_fn(model.fn_kind, model.k2, r_d);
    return {p_d.x * f1, p_d.y * f2};
}

PixelPoint distort_decentering(const PixelPoint &p, std::span<const double> coeffs,
                               const Intrinsics &intr, bool pixel_radius) {
    if (coeffs.size() != 6) {
        throw Error("decentering model expects 6 coefficients");
    }
    const double ub = p.u - intr.u0;
    const double vb = p.v - intr.v0;
    const double r2 = pixel_radius ? (ub * ub + vb * vb) : pixel_to_normalized(p, intr).radius_sq();
    const double r4 = r2 * r2;
    const double radial = 1.0 + coeffs[0] * r2 + coeffs[1] * r4 + coeffs[2] * r4 * r2;
    const double p1 = coeffs[3], p2 = coeffs[4], p3 = coeffs[5];
    const double tangential_gain = 1.0 + p3 * r2;
    const double du = (2.0 * p1 * ub * vb + p2 * (r2 + 2.0 * ub * ub)) * tangential_gain;
    const double dv = (p1 * (r2 + 2.0 * vb * vb) + 2.0 * p2 * ub * vb) * tangential_gain;
    return {intr.u0 + ub * radial + du, intr.v0 + vb * radial + dv};
}

} // namespace calib
