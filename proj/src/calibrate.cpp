#include "calib/calibrate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace calib {

namespace {

constexpr double kPenaltyResidual = 1e6; // px, per affected coordinate

std::size_t intrinsics_offset(std::size_t view_count) { return 5 + 6 * view_count; }

// Residual layout: per view, per point, (du, dv) = observed - predicted.
// When penalize is true any model failure at a point writes the penalty
// residual instead of throwing, which keeps trial steps total.
double residuals_impl(const Intrinsics &intr, std::span<const Extrinsics> extrinsics,
                      const DistortionModel &model, const CalibrationDataset &dataset,
                      bool penalize, std::vector<double> *out) {
    const ModelEvaluator eval(model, intr);
    double j = 0.0;
    std::size_t idx = 0;
    if (out) {
        out->resize(2 * dataset.total_points());
    }
    for (std::size_t v = 0; v < dataset.views.size(); ++v) {
        const auto &view = dataset.views[v];
        for (const Observation &obs : view.points) {
            double du, dv;
            try {
                const NormalizedPoint projected =
                    project_normalized({obs.X, obs.Y, 0.0}, extrinsics[v]);
                const PixelPoint predicted = eval.distorted_pixel(projected);
                du = obs.image.u - predicted.u;
                dv = obs.image.v - predicted.v;
            } catch (const Error &) {
                if (!penalize) {
                    throw;
                }
                du = kPenaltyResidual;
                dv = kPenaltyResidual;
            }
            if (out) {
                (*out)[idx] = du;
                (*out)[idx + 1] = dv;
            }
            idx += 2;
            j += du * du + dv * dv;
        }
    }
    return j;
}

} // namespace

std::size_t CalibrationDataset::total_points() const {
    std::size_t n = 0;
    for (const auto &view : views) {
        n += view.points.size();
    }
    return n;
}

void CalibrationDataset::validate(bool fix_skew) const {
    const std::size_t min_views = fix_skew ? 2 : 3;
    if (views.size() < min_views) {
        throw InsufficientViews("dataset has " + std::to_string(views.size()) +
                                " views, need at least " + std::to_string(min_views));
    }
    for (std::size_t v = 0; v < views.size(); ++v) {
        const auto &pts = views[v].points;
        if (pts.size() < 4) {
            throw DegenerateConfiguration("view " + std::to_string(v) +
                                          " has fewer than 4 points");
        }
        // Non-collinearity: some point must sit off the line through the
        // first two distinct points.
        const double ax = pts[0].X, ay = pts[0].Y;
        bool ok = false;
        for (std::size_t i = 1; i < pts.size() && !ok; ++i) {
            const double bx = pts[i].X - ax, by = pts[i].Y - ay;
            if (bx * bx + by * by < 1e-20) {
                continue;
            }
            for (std::size_t j = 1; j < pts.size(); ++j) {
                const double cx = pts[j].X - ax, cy = pts[j].Y - ay;
                if (std::abs(bx * cy - by * cx) > 1e-12) {
                    ok = true;
                    break;
                }
            }
            break;
        }
        if (!ok) {
            throw DegenerateConfiguration("view " + std::to_string(v) +
                                          " has collinear world points");
        }
    }
}

Eigen::VectorXd pack_parameters(const Intrinsics &intr, std::span<const Extrinsics> extrinsics,
                                const DistortionModel &model) {
    const std::size_t n = intrinsics_offset(extrinsics.size()) + model.param_count();
    Eigen::VectorXd p(static_cast<Eigen::Index>(n));
    p(0) = intr.alpha;
    p(1) = intr.gamma;
    p(2) = intr.beta;
    p(3) = intr.u0;
    p(4) = intr.v0;
    for (std::size_t v = 0; v < extrinsics.size(); ++v) {
        const Eigen::Index base = static_cast<Eigen::Index>(5 + 6 * v);
        p.segment<3>(base) = extrinsics[v].rotation_vec;
        p.segment<3>(base + 3) = extrinsics[v].translation;
    }
    if (model.param_count() > 0) {
        std::vector<double> coeffs(model.param_count());
        model.get_params(coeffs);
        for (std::size_t i = 0; i < coeffs.size(); ++i) {
            p(static_cast<Eigen::Index>(intrinsics_offset(extrinsics.size()) + i)) = coeffs[i];
        }
    }
    return p;
}

void unpack_parameters(const Eigen::VectorXd &params, Intrinsics &intr,
                       std::vector<Extrinsics> &extrinsics, DistortionModel &model) {
    const std::size_t d = model.param_count();
    if (params.size() < static_cast<Eigen::Index>(5 + d) ||
        (static_cast<std::size_t>(params.size()) - 5 - d) % 6 != 0) {
        throw Error("parameter vector length does not match the model layout");
    }
    const std::size_t view_count = (static_cast<std::size_t>(params.size()) - 5 - d) / 6;
    intr.alpha = params(0);
    intr.gamma = params(1);
    intr.beta = params(2);
    intr.u0 = params(3);
    intr.v0 = params(4);
    extrinsics.resize(view_count);
    for (std::size_t v = 0; v < view_count; ++v) {
        const Eigen::Index base = static_cast<Eigen::Index>(5 + 6 * v);
        extrinsics[v] = Extrinsics::from_rotation_vec(params.segment<3>(base),
                                                      params.segment<3>(base + 3));
    }
    if (d > 0) {
        std::vector<double> coeffs(d);
        for (std::size_t i = 0; i < d; ++i) {
            coeffs[i] = params(static_cast<Eigen::Index>(intrinsics_offset(view_count) + i));
        }
        model.set_params(coeffs);
    }
}

double compute_j(const Intrinsics &intr, std::span<const Extrinsics> extrinsics,
                 const DistortionModel &model, const CalibrationDataset &dataset,
                 std::vector<double> *residuals) {
    return residuals_impl(intr, extrinsics, model, dataset, false, residuals);
}

double compute_j(const Eigen::VectorXd &params, const DistortionModel &model_spec,
                 const CalibrationDataset &dataset, std::vector<double> *residuals) {
    Intrinsics intr;
    std::vector<Extrinsics> extr;
    DistortionModel model = model_spec;
    unpack_parameters(params, intr, extr, model);
    return compute_j(intr, extr, model, dataset, residuals);
}

std::vector<double> projection_radii(const CalibrationDataset &dataset,
                                     std::span<const Extrinsics> extrinsics) {
    std::vector<double> radii;
    radii.reserve(dataset.total_points());
    for (std::size_t v = 0; v < dataset.views.size(); ++v) {
        for (const Observation &obs : dataset.views[v].points) {
            radii.push_back(project_normalized({obs.X, obs.Y, 0.0}, extrinsics[v]).radius());
        }
    }
    return radii;
}

CalibrationReport refine(const CalibrationDataset &dataset, const DistortionModel &model_init,
                         const Intrinsics &init_intr, std::span<const Extrinsics> init_extr,
                         const RefineOptions &options) {
    const std::size_t view_count = init_extr.size();
    const std::size_t residual_count = 2 * dataset.total_points();
    const std::size_t param_count = intrinsics_offset(view_count) + model_init.param_count();

    DistortionModel model = model_init;
    Eigen::VectorXd params = pack_parameters(init_intr, init_extr, model);

    Intrinsics work_intr;
    std::vector<Extrinsics> work_extr;
    const auto eval_residuals = [&](const Eigen::VectorXd &p, bool penalize,
                                    std::vector<double> &out) {
        unpack_parameters(p, work_intr, work_extr, model);
        return residuals_impl(work_intr, work_extr, model, dataset, penalize, &out);
    };

    const bool is_piecewise = model.mode == ModelMode::Piecewise;
    // Rescaling the breakpoints with a new r_max changes what the stored
    // knot values mean. Re-sampling the current profile at the new
    // breakpoints carries the fitted function across the rescale (exact for
    // one segment, first-order for more), which keeps J continuous between
    // outer iterations.
    const auto refresh_r_max = [&](Eigen::VectorXd &p) {
        if (!is_piecewise) {
            return;
        }
        unpack_parameters(p, work_intr, work_extr, model);
        const double r_new = update_r_max(projection_radii(dataset, work_extr));
        if (r_new == model.r_max || r_new <= 0.0) {
            model.r_max = r_new;
            return;
        }
        const std::size_t s = static_cast<std::size_t>(model.segments);
        const Eigen::Index knot_base = static_cast<Eigen::Index>(intrinsics_offset(view_count));
        try {
            const GeometricPiecewiseModel old(model.fn, model.k1, model.k2, model.r_max);
            for (std::size_t i = 0; i < s; ++i) {
                const double r_i = r_new * static_cast<double>(i + 1) / static_cast<double>(s);
                const double gx = old.profile_x.eval(r_i);
                const double gy = old.profile_y.eval(r_i);
                if (gx > 0.0) {
                    p(knot_base + static_cast<Eigen::Index>(i)) = gx;
                }
                if (gy > 0.0) {
                    p(knot_base + static_cast<Eigen::Index>(s + i)) = gy;
                }
            }
        } catch (const Error &) {
            // Unresolvable old profile (first iteration, degenerate state):
            // keep the stored knot values.
        }
        model.r_max = r_new;
        unpack_parameters(p, work_intr, work_extr, model);
    };

    const Eigen::Index np = static_cast<Eigen::Index>(param_count);
    std::vector<double> residuals(residual_count);
    std::vector<double> trial_residuals(residual_count);

    refresh_r_max(params);
    const double j_initial = eval_residuals(params, false, residuals);
    double j_current = j_initial;

    Eigen::MatrixXd jacobian(static_cast<Eigen::Index>(residual_count), np);
    Eigen::VectorXd gradient(np);
    Eigen::MatrixXd jtj(np, np);

    // A frozen gamma keeps its packed slot but never moves.
    const auto masked = [&](Eigen::Index j) { return options.fix_skew && j == 1; };

    double lambda = 1e-3;
    bool converged = false;
    bool stalled = false;
    int iteration = 0;

    while (iteration < options.max_iterations && !converged && !stalled) {
        ++iteration;
        refresh_r_max(params);
        j_current = eval_residuals(params, false, residuals);
        if (options.on_iteration) {
            options.on_iteration({iteration, j_current, is_piecewise ? model.r_max : 0.0});
        }

        // Forward-difference Jacobian, step 1e-7 (1 + |theta|) per parameter.
        for (Eigen::Index j = 0; j < np; ++j) {
            if (masked(j)) {
                jacobian.col(j).setZero();
                continue;
            }
            const double step = 1e-7 * (1.0 + std::abs(params(j)));
            Eigen::VectorXd p_step = params;
            p_step(j) += step;
            eval_residuals(p_step, true, trial_residuals);
            for (std::size_t i = 0; i < residual_count; ++i) {
                jacobian(static_cast<Eigen::Index>(i), j) =
                    (trial_residuals[i] - residuals[i]) / step;
            }
        }
        jtj.noalias() = jacobian.transpose() * jacobian;
        gradient.noalias() =
            jacobian.transpose() * Eigen::Map<const Eigen::VectorXd>(
                                       residuals.data(), static_cast<Eigen::Index>(residual_count));

        // Inner damping loop: retry with stronger damping until a step
        // decreases J or the step itself is already negligible.
        while (true) {
            Eigen::MatrixXd damped = jtj;
            for (Eigen::Index j = 0; j < np; ++j) {
                double d = jtj(j, j);
                if (masked(j) || d <= 0.0) {
                    d = 1.0;
                }
                damped(j, j) += lambda * d;
            }
            Eigen::VectorXd delta = damped.ldlt().solve(-gradient);
            for (Eigen::Index j = 0; j < np; ++j) {
                if (masked(j)) {
                    delta(j) = 0.0;
                }
            }
            const double step_inf = delta.cwiseAbs().maxCoeff();
            const Eigen::VectorXd trial = params + delta;
            const double j_trial = eval_residuals(trial, true, trial_residuals);
            if (step_inf < options.tol_x && lambda <= 1e-3) {
                // Near-undamped step below the tolerance: stationary. The
                // computed step is still applied when it helps.
                if (j_trial < j_current) {
                    params = trial;
                    j_current = j_trial;
                }
                converged = true;
                break;
            }
            if (j_trial < j_current) {
                const double decrease = j_current - j_trial;
                params = trial;
                j_current = j_trial;
                lambda = std::max(lambda / 3.0, 1e-12);
                if (step_inf < options.tol_x ||
                    decrease < options.tol_fun * std::max(j_current, 1e-300)) {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
            if (lambda > 1e12) {
                stalled = true; // no decrease at any damping: keep best-so-far
                break;
            }
        }
    }

    refresh_r_max(params);
    CalibrationReport report;
    report.model = model;
    std::vector<Extrinsics> final_extr;
    unpack_parameters(params, report.intrinsics, final_extr, report.model);
    report.extrinsics = std::move(final_extr);
    report.j_initial = j_initial;
    report.j_final = eval_residuals(params, false, residuals);
    report.rms = std::sqrt(report.j_final / static_cast<double>(residual_count));
    report.per_point_residuals.resize(dataset.total_points());
    for (std::size_t i = 0; i < report.per_point_residuals.size(); ++i) {
        report.per_point_residuals[i] = std::hypot(residuals[2 * i], residuals[2 * i + 1]);
    }
    report.iterations = iteration;
    report.converged = converged;
    return report;
}

CalibrationReport calibrate(const CalibrationDataset &dataset, DistortionModel model,
                            const RefineOptions &options) {
    dataset.validate(options.fix_skew);
    std::vector<Eigen::Matrix3d> homographies;
    homographies.reserve(dataset.views.size());
    std::vector<PlanarCorrespondence> pts;
    for (const auto &view : dataset.views) {
        pts.clear();
        pts.reserve(view.points.size());
        for (const Observation &obs : view.points) {
            pts.push_back({obs.X, obs.Y, obs.image.u, obs.image.v});
        }
        homographies.push_back(estimate_homography(pts));
    }
    const Intrinsics intr = intrinsics_from_homographies(homographies, options.fix_skew);
    std::vector<Extrinsics> extr;
    extr.reserve(homographies.size());
    for (const auto &h : homographies) {
        extr.push_back(extrinsics_from_homography(h, intr));
    }
    model.reset_params();
    return refine(dataset, model, intr, extr, options);
}

} // namespace calib
