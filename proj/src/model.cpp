#include "calib/model.hpp"

#include "calib/undistort.hpp"

#include <algorithm>
#include <cmath>

namespace calib {

const char *model_mode_name(ModelMode mode) {
    switch (mode) {
    case ModelMode::None: return "none";
    case ModelMode::Radial: return "radial";
    case ModelMode::Geometric: return "geometric";
    case ModelMode::DU: return "du";
    case ModelMode::Piecewise: return "piecewise";
    case ModelMode::Decentering: return "decentering";
    }
    return "?";
}

ModelMode model_mode_from_name(const std::string &name) {
    if (name == "none") return ModelMode::None;
    if (name == "radial") return ModelMode::Radial;
    if (name == "geometric") return ModelMode::Geometric;
    if (name == "du") return ModelMode::DU;
    if (name == "piecewise") return ModelMode::Piecewise;
    if (name == "decentering") return ModelMode::Decentering;
    throw ParseError("unknown model mode '" + name + "'");
}

std::size_t DistortionModel::param_count() const {
    switch (mode) {
    case ModelMode::None:
        return 0;
    case ModelMode::Radial:
        return coeff_count(fn, poly_terms);
    case ModelMode::Geometric:
    case ModelMode::DU:
        return 2 * coeff_count(fn, poly_terms);
    case ModelMode::Piecewise:
        return 2 * static_cast<std::size_t>(segments);
    case ModelMode::Decentering:
        return 6;
    }
    return 0;
}

void DistortionModel::reset_params() {
    const bool knots = mode == ModelMode::Piecewise;
    const double fill = knots ? 1.0 : 0.0;
    std::size_t n1 = 0, n2 = 0;
    switch (mode) {
    case ModelMode::None:
        break;
    case ModelMode::Radial:
        n1 = coeff_count(fn, poly_terms);
        break;
    case ModelMode::Geometric:
    case ModelMode::DU:
        n1 = n2 = coeff_count(fn, poly_terms);
        break;
    case ModelMode::Piecewise:
        n1 = n2 = static_cast<std::size_t>(segments);
        break;
    case ModelMode::Decentering:
        n1 = 6;
        break;
    }
    k1.assign(n1, fill);
    k2.assign(n2, fill);
}

void DistortionModel::set_params(std::span<const double> params) {
    if (params.size() != param_count()) {
        throw Error("distortion parameter count mismatch");
    }
    std::copy_n(params.begin(), k1.size(), k1.begin());
    std::copy_n(params.begin() + static_cast<std::ptrdiff_t>(k1.size()), k2.size(), k2.begin());
}

void DistortionModel::get_params(std::span<double> params) const {
    if (params.size() != param_count()) {
        throw Error("distortion parameter count mismatch");
    }
    std::copy(k1.begin(), k1.end(), params.begin());
    std::copy(k2.begin(), k2.end(), params.begin() + static_cast<std::ptrdiff_t>(k1.size()));
}

std::string DistortionModel::describe() const {
    std::string out = model_mode_name(mode);
    if (mode == ModelMode::None || mode == ModelMode::Decentering) {
        return out;
    }
    out += " fn=";
    out += fn_kind_name(fn);
    if (fn == FnKind::PolyEven) {
        out += std::to_string(poly_terms);
    }
    if (mode == ModelMode::Piecewise) {
        out += " segments=" + std::to_string(segments);
    } else if (mode == ModelMode::Geometric && formulation == Formulation::UDPixel) {
        out += " pair=pixel";
    } else if (mode == ModelMode::Radial && formulation == Formulation::DU) {
        out += " pair=du";
    }
    return out;
}

DistortionModel DistortionModel::none() {
    DistortionModel m;
    m.mode = ModelMode::None;
    m.reset_params();
    return m;
}

DistortionModel DistortionModel::radial(FnKind fn, std::size_t poly_terms) {
    DistortionModel m;
    m.mode = ModelMode::Radial;
    m.fn = fn;
    m.poly_terms = poly_terms;
    m.reset_params();
    return m;
}

DistortionModel DistortionModel::geometric(FnKind fn, std::size_t poly_terms,
                                           Formulation formulation) {
    DistortionModel m;
    m.mode = ModelMode::Geometric;
    m.fn = fn;
    m.poly_terms = poly_terms;
    m.formulation = formulation;
    m.reset_params();
    return m;
}

DistortionModel DistortionModel::du(FnKind fn, std::size_t poly_terms) {
    DistortionModel m;
    m.mode = ModelMode::DU;
    m.fn = fn;
    m.poly_terms = poly_terms;
    m.formulation = Formulation::DU;
    m.reset_params();
    return m;
}

DistortionModel DistortionModel::piecewise(FnKind base, int segments) {
    if (base != FnKind::T5 && base != FnKind::T6) {
        throw Error("piecewise models require function kind 5 or 6");
    }
    DistortionModel m;
    m.mode = ModelMode::Piecewise;
    m.fn = base;
    m.segments = segments;
    m.reset_params();
    return m;
}

DistortionModel DistortionModel::decentering() {
    DistortionModel m;
    m.mode = ModelMode::Decentering;
    m.fn = FnKind::Decentering;
    m.reset_params();
    return m;
}

ModelEvaluator::ModelEvaluator(const DistortionModel &model, const Intrinsics &intr)
    : model_(model), intr_(intr) {
    switch (model.mode) {
    case ModelMode::Piecewise:
        piecewise_ = GeometricPiecewiseModel(model.fn, model.k1, model.k2, model.r_max);
        break;
    case ModelMode::Radial:
        geometric_ = GeometricModel(model.fn, model.k1, model.k1, Formulation::UDNormalized);
        break;
    case ModelMode::Geometric:
        geometric_ = GeometricModel(model.fn, model.k1, model.k2, model.formulation);
        break;
    case ModelMode::DU:
        geometric_ = GeometricModel(model.fn, model.k1, model.k2, Formulation::DU);
        break;
    default:
        break;
    }
}

// Prediction for a distorted-to-undistorted model: find (x_d, y_d) with
// x = x_d f(r_d, kx), y = y_d f(r_d, ky).
PixelPoint ModelEvaluator::invert_du(const NormalizedPoint &p, const std::vector<double> &kx,
                                     const std::vector<double> &ky) const {
    if (p.x == 0.0 && p.y == 0.0) {
        return normalized_to_pixel(p, intr_);
    }
    const auto gain = [this](const std::vector<double> &k) {
        return [this, &k](double r) {
            return GainEval{eval_fn(model_.fn, k, r), eval_fn_deriv(model_.fn, k, r)};
        };
    };
    const double r_d = solve_scaled_radius(p.x, p.y, gain(kx), gain(ky), p.radius(), 1e-14, 100);
    const double f1 = eval_fn(model_.fn, kx, r_d);
    const double f2 = eval_fn(model_.fn, ky, r_d);
    return normalized_to_pixel({p.x / f1, p.y / f2}, intr_);
}

PixelPoint ModelEvaluator::distorted_pixel(const NormalizedPoint &p) const {
    switch (model_.mode) {
    case ModelMode::None:
        return normalized_to_pixel(p, intr_);
    case ModelMode::Radial: {
        if (model_.formulation == Formulation::DU) {
            return invert_du(p, model_.k1, model_.k1);
        }
        const double f = eval_fn(model_.fn, model_.k1, p.radius());
        return normalized_to_pixel({p.x * f, p.y * f}, intr_);
    }
    case ModelMode::Geometric:
        if (model_.formulation == Formulation::UDPixel) {
            // Pixel-offset pair: scale (u - u0, v - v0) per axis.
            return distort_axis_pixel(normalized_to_pixel(p, intr_), geometric_, intr_);
        }
        return normalized_to_pixel(distort_geometric(p, geometric_, intr_), intr_);
    case ModelMode::DU:
        return invert_du(p, model_.k1, model_.k2);
    case ModelMode::Piecewise:
        return normalized_to_pixel(distort_piecewise(p, piecewise_), intr_);
    case ModelMode::Decentering:
        return distort_decentering(normalized_to_pixel(p, intr_), model_.k1, intr_,
                                   model_.decentering_pixel_radius);
    }
    return normalized_to_pixel(p, intr_);
}

double ModelEvaluator::axis_gain(int axis, double r) const {
    switch (model_.mode) {
    case ModelMode::None:
        return 1.0;
    case ModelMode::Radial:
    case ModelMode::Decentering:
        return eval_fn(model_.fn, model_.k1, r);
    case ModelMode::Geometric:
    case ModelMode::DU:
        return eval_fn(model_.fn, axis == 0 ? model_.k1 : model_.k2, r);
    case ModelMode::Piecewise:
        return axis == 0 ? piecewise_.profile_x.eval(r) : piecewise_.profile_y.eval(r);
    }
    return 1.0;
}

NormalizedPoint undistort_model(const DistortionModel &model, const NormalizedPoint &distorted,
                                const std::string &method) {
    switch (model.mode) {
    case ModelMode::None:
        return distorted;
    case ModelMode::DU: {
        // Already the distorted-to-undistorted direction.
        GeometricModel g(model.fn, model.k1, model.k2, Formulation::DU);
        return distort_du(distorted, g);
    }
    case ModelMode::Piecewise: {
        GeometricPiecewiseModel pw(model.fn, model.k1, model.k2, model.r_max);
        if (method == "analytic") {
            return undistort_piecewise(distorted, pw);
        }
        if (method == "iterative") {
            const auto gain = [&pw](const PiecewiseProfile &prof) {
                return [&prof](double r) { return GainEval{prof.eval(r), prof.eval_deriv(r)}; };
            };
            const double r = solve_scaled_radius(distorted.x, distorted.y, gain(pw.profile_x),
                                                 gain(pw.profile_y), distorted.radius());
            return {distorted.x / pw.profile_x.eval(r), distorted.y / pw.profile_y.eval(r)};
        }
        throw Error("piecewise models support the analytic and iterative methods");
    }
    case ModelMode::Radial:
    case ModelMode::Geometric: {
        if (model.mode == ModelMode::Radial && model.formulation == Formulation::DU) {
            GeometricModel g(model.fn, model.k1, model.k1, Formulation::DU);
            return distort_du(distorted, g);
        }
        GeometricModel g(model.fn, model.k1,
                         model.mode == ModelMode::Radial ? model.k1 : model.k2,
                         Formulation::UDNormalized);
        if (method == "analytic") {
            return undistort_analytic(distorted, g);
        }
        if (method == "iterative") {
            return undistort_iterative(distorted, g);
        }
        if (method == "approx") {
            return undistort_approx(distorted, g);
        }
        throw Error("unknown undistortion method '" + method + "'");
    }
    case ModelMode::Decentering:
        throw Error("the decentering model has no normalized-coordinate inverse here");
    }
    throw Error("unsupported model for undistortion");
}

} // namespace calib
