#pragma once

#include "calib/types.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace calib {

/// The catalog of scalar distortion functions f(r, k). T1..T10 are the
/// numbered polynomial/rational forms:
///
///   T1  1 + k1 r                 T6  1 / (1 + k1 r^2)
///   T2  1 + k1 r^2               T7  (1 + k1 r) / (1 + k2 r^2)
///   T3  1 + k1 r + k2 r^2        T8  1 / (1 + k1 r + k2 r^2)
///   T4  1 + k1 r^2 + k2 r^4      T9  (1 + k1 r) / (1 + k2 r + k3 r^2)
///   T5  1 / (1 + k1 r)           T10 (1 + k1 r^2) / (1 + k2 r + k3 r^2)
///
/// PolyEven is the even-power polynomial 1 + k1 r^2 + ... + km r^(2m).
/// GeneralRational is (1 + c1 r + c2 r^2)/(1 + c3 r + c4 r^2 + c5 r^3),
/// which specializes to every rational entry above.
/// Decentering is the six-coefficient radial+tangential pixel-offset model;
/// its scalar part (used by eval_fn) is the radial factor
/// 1 + k1 r^2 + k2 r^4 + k3 r^6.
enum class FnKind {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    T10,
    PolyEven,
    GeneralRational,
    Decentering,
};

/// Number of coefficients a kind expects. poly_terms is only consulted for
/// PolyEven.
std::size_t coeff_count(FnKind kind, std::size_t poly_terms = 0);

const char *fn_kind_name(FnKind kind);
FnKind fn_kind_from_name(const std::string &name, std::size_t *poly_terms = nullptr);

/// A distortion function: a kind plus its coefficient vector.
struct DistortionFn {
    FnKind kind = FnKind::T2;
    std::vector<double> coeffs;

    DistortionFn() = default;
    DistortionFn(FnKind k, std::vector<double> c) : kind(k), coeffs(std::move(c)) {}
};

// Power-basis polynomial with a small fixed capacity; evaluation is Horner.
struct PolyView {
    std::array<double, 13> c{};
    int n = 0; // number of coefficients (degree + 1)

    double eval(double r) const {
        double acc = 0.0;
        for (int i = n - 1; i >= 0; --i) {
            acc = acc * r + c[i];
        }
        return acc;
    }
    double eval_deriv(double r) const {
        double acc = 0.0;
        for (int i = n - 1; i >= 1; --i) {
            acc = acc * r + c[i] * static_cast<double>(i);
        }
        return acc;
    }
};

/// f written as num(r)/den(r) in the power basis. Every catalog kind has
/// this shape, which gives a single evaluation and derivative path.
struct RationalView {
    PolyView num;
    PolyView den;
};

RationalView rational_view(FnKind kind, std::span<const double> coeffs);

/// Evaluate f(r, k). Throws PoleAtRadius when a rational denominator
/// magnitude falls below 1e-14 at r.
double eval_fn(FnKind kind, std::span<const double> coeffs, double r);
double eval_fn(const DistortionFn &fn, double r);

/// df/dr at r. Same pole rule as eval_fn.
double eval_fn_deriv(FnKind kind, std::span<const double> coeffs, double r);

/// Radial distortion: both axes scaled by the same f(r, k).
NormalizedPoint distort_radial(const NormalizedPoint &p, const DistortionFn &fn);

/// How a two-axis model couples to the camera matrix. UDNormalized scales
/// normalized coordinates per axis; UDPixel scales pixel offsets per axis
/// (the two coincide when the skew is zero). DU runs in the opposite
/// direction, mapping distorted to undistorted coordinates.
enum class Formulation {
    UDNormalized,
    UDPixel,
    DU,
};

const char *formulation_name(Formulation f);
Formulation formulation_from_name(const std::string &name);

/// Two-axis distortion model: one function form, independent coefficient
/// vectors per image axis. With k1 == k2 it reproduces the radial model
/// exactly.
struct GeometricModel {
    FnKind fn_kind = FnKind::T2;
    std::vector<double> k1; // x-axis coefficients
    std::vector<double> k2; // y-axis coefficients
    Formulation formulation = Formulation::UDNormalized;

    GeometricModel() = default;
    GeometricModel(FnKind kind, std::vector<double> kx, std::vector<double> ky,
                   Formulation form = Formulation::UDNormalized)
        : fn_kind(kind), k1(std::move(kx)), k2(std::move(ky)), formulation(form) {}
};

/// Forward two-axis distortion in normalized coordinates.
/// UDNormalized: x_d = x f(r,k1), y_d = y f(r,k2).
/// UDPixel:      x_d = x f(r,k1) + (gamma/alpha) y [f(r,k1) - f(r,k2)],
///               y_d = y f(r,k2).
NormalizedPoint distort_geometric(const NormalizedPoint &p, const GeometricModel &model,
                                  const Intrinsics &intr);

/// The same map expressed on pixel coordinates:
///   u_d - u0 = (u - u0) f(r,k1) + (gamma/beta)(v - v0)[f(r,k2) - f(r,k1)]
///   v_d - v0 = (v - v0) f(r,k2)
/// with r taken from the normalized counterpart of p.
PixelPoint distort_geometric_pixel(const PixelPoint &p, const GeometricModel &model,
                                   const Intrinsics &intr);

/// Pixel-offset scaling form (the UDPixel companion on pixels):
///   u_d - u0 = (u - u0) f(r,k1),  v_d - v0 = (v - v0) f(r,k2).
PixelPoint distort_axis_pixel(const PixelPoint &p, const GeometricModel &model,
                              const Intrinsics &intr);

/// Distorted-to-undistorted forward model: x = x_d f(r_d, k1), y = y_d f(r_d, k2).
/// This is a model in its own right, not the inverse of the UD map.
NormalizedPoint distort_du(const NormalizedPoint &p_d, const GeometricModel &model);

/// Six-coefficient radial + decentering pixel model. coeffs = (k1,k2,k3,p1,p2,p3):
///   u_d - u0 = ub (1 + k1 r^2 + k2 r^4 + k3 r^6)
///              + (2 p1 ub vb + p2 (r^2 + 2 ub^2)) (1 + p3 r^2)
///   v_d - v0 = vb (1 + k1 r^2 + k2 r^4 + k3 r^6)
///              + (p1 (r^2 + 2 vb^2) + 2 p2 ub vb) (1 + p3 r^2)
/// with ub = u - u0, vb = v - v0. By default r is the normalized radius of
/// p; pixel_radius selects the pixel-unit radius instead.
PixelPoint distort_decentering(const PixelPoint &p, std::span<const double> coeffs,
                               const Intrinsics &intr, bool pixel_radius = false);

} // namespace calib
