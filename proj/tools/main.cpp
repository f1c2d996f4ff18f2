#include "calib/io.hpp"
#include "calib/undistort.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

using namespace calib;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoConvergence = 2;

struct ModelFlags {
    std::string mode = "geometric";
    std::string fn = "4";
    std::string formulation = "normalized";
    int segments = 0; // 0: plain model, 1..3: piecewise
    bool fix_skew = false;
    int max_iter = 120;
    double tol = 1e-5;
};

void add_model_flags(CLI::App *cmd, ModelFlags &flags) {
    cmd->add_option("--mode", flags.mode, "Distortion mode: radial | geometric | du")
        ->check(CLI::IsMember({"radial", "geometric", "du"}));
    cmd->add_option("--fn", flags.fn,
                    "Distortion function: 1..10, polyN (even powers, N terms), heikkila");
    cmd->add_option("--formulation", flags.formulation,
                    "Coefficient coupling: normalized | pixel (geometric), du (radial)")
        ->check(CLI::IsMember({"normalized", "pixel", "du"}));
    cmd->add_option("--segments", flags.segments, "Piecewise segment count (requires --fn 5|6)")
        ->check(CLI::Range(1, 3));
    cmd->add_flag("--fix-skew", flags.fix_skew, "Constrain the skew to zero");
    cmd->add_option("--max-iter", flags.max_iter, "Refinement iteration cap");
    cmd->add_option("--tol", flags.tol, "Step and relative-decrease tolerance");
}

DistortionModel model_from_flags(const ModelFlags &flags) {
    if (flags.fn == "heikkila") {
        return DistortionModel::decentering();
    }
    std::size_t poly_terms = 0;
    const FnKind kind = fn_kind_from_name(flags.fn, &poly_terms);
    if (kind == FnKind::PolyEven && poly_terms == 0) {
        throw ParseError("polyN needs a term count, e.g. poly6");
    }
    if (flags.segments > 0) {
        if (kind != FnKind::T5 && kind != FnKind::T6) {
            throw ParseError("--segments requires --fn 5 or --fn 6");
        }
        if (flags.mode != "geometric") {
            throw ParseError("--segments applies to the geometric mode");
        }
        return DistortionModel::piecewise(kind, flags.segments);
    }
    if (flags.mode == "radial") {
        DistortionModel model = DistortionModel::radial(kind, poly_terms);
        if (flags.formulation == "du") {
            model.formulation = Formulation::DU;
        }
        return model;
    }
    if (flags.formulation == "du" && flags.mode == "geometric") {
        throw ParseError("use --mode du for the two-axis distorted-to-undistorted model");
    }
    if (flags.mode == "du") {
        return DistortionModel::du(kind, poly_terms);
    }
    return DistortionModel::geometric(kind, poly_terms,
                                      formulation_from_name(flags.formulation));
}

RefineOptions options_from_flags(const ModelFlags &flags) {
    RefineOptions options;
    options.max_iterations = flags.max_iter;
    options.tol_x = flags.tol;
    options.tol_fun = flags.tol;
    options.fix_skew = flags.fix_skew;
    return options;
}

void print_report_line(const CalibrationReport &report) {
    std::printf("model=%s J=%.6f rms=%.6f iterations=%d converged=%s\n",
                report.model.describe().c_str(), report.j_final, report.rms, report.iterations,
                report.converged ? "yes" : "no");
}

int cmd_calibrate(const std::string &input, const std::string &output, const ModelFlags &flags,
                  bool quiet) {
    const CalibrationDataset dataset = load_dataset(input);
    const DistortionModel model = model_from_flags(flags);
    const CalibrationReport report = calibrate(dataset, model, options_from_flags(flags));
    if (!output.empty()) {
        save_report(report, output);
    }
    if (!quiet) {
        print_report_line(report);
    }
    return report.converged ? kExitOk : kExitNoConvergence;
}

int cmd_compare(const std::string &input, const std::string &output, const ModelFlags &flags) {
    const CalibrationDataset dataset = load_dataset(input);
    const RefineOptions options = options_from_flags(flags);

    struct Row {
        std::string label;
        std::optional<double> j_geometric;
        std::optional<double> j_radial;
        std::optional<double> compromise; // fraction of radii where the radial
                                          // curve sits in the two-axis envelope
        std::string error;
    };
    std::vector<Row> rows;

    const auto run = [&](const DistortionModel &model) {
        return calibrate(dataset, model, options);
    };

    for (int fn = 1; fn <= 10; ++fn) {
        Row row;
        row.label = std::to_string(fn);
        const FnKind kind = static_cast<FnKind>(fn - 1);
        try {
            const CalibrationReport geo = run(DistortionModel::geometric(kind));
            const CalibrationReport rad = run(DistortionModel::radial(kind));
            row.j_geometric = geo.j_final;
            row.j_radial = rad.j_final;

            const ModelEvaluator geo_eval(geo.model, geo.intrinsics);
            const ModelEvaluator rad_eval(rad.model, rad.intrinsics);
            const double r_max = update_r_max(projection_radii(dataset, geo.extrinsics));
            int inside = 0;
            constexpr int kSamples = 50;
            for (int i = 1; i <= kSamples; ++i) {
                const double r = r_max * i / kSamples;
                const double f1 = geo_eval.axis_gain(0, r);
                const double f2 = geo_eval.axis_gain(1, r);
                const double lo = std::min(f1, f2), hi = std::max(f1, f2);
                const double slack = 0.05 * (hi - lo);
                const double fr = rad_eval.axis_gain(0, r);
                if (fr >= lo - slack && fr <= hi + slack) {
                    ++inside;
                }
            }
            row.compromise = static_cast<double>(inside) / kSamples;
        } catch (const Error &e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    {
        Row row;
        row.label = "poly6";
        try {
            row.j_radial = run(DistortionModel::radial(FnKind::PolyEven, 6)).j_final;
        } catch (const Error &e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }
    {
        Row row;
        row.label = "heikkila";
        try {
            row.j_geometric = run(DistortionModel::decentering()).j_final;
        } catch (const Error &e) {
            row.error = e.what();
        }
        rows.push_back(std::move(row));
    }

    // Function labels ordered by decreasing geometric J, for plotting.
    std::vector<std::string> sorted;
    {
        std::vector<std::pair<double, std::string>> keyed;
        for (const auto &row : rows) {
            if (row.j_geometric) {
                keyed.emplace_back(*row.j_geometric, row.label);
            }
        }
        std::stable_sort(keyed.begin(), keyed.end(),
                         [](const auto &a, const auto &b) { return a.first > b.first; });
        for (auto &[j, label] : keyed) {
            sorted.push_back(label);
        }
    }

    std::printf("%-10s %16s %16s %12s\n", "fn", "J_geometric", "J_radial", "compromise");
    for (const auto &row : rows) {
        const auto cell = [](const std::optional<double> &v) {
            if (!v) {
                return std::string("-");
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.6f", *v);
            return std::string(buf);
        };
        const auto frac = [](const std::optional<double> &v) {
            if (!v) {
                return std::string("-");
            }
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f", *v);
            return std::string(buf);
        };
        std::printf("%-10s %16s %16s %12s%s\n", row.label.c_str(), cell(row.j_geometric).c_str(),
                    cell(row.j_radial).c_str(), frac(row.compromise).c_str(),
                    row.error.empty() ? "" : "  [error]");
    }

    if (!output.empty()) {
        std::ofstream out(output);
        if (!out) {
            throw ParseError("cannot write " + output);
        }
        out << "{\n  \"rows\": [\n";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto &row = rows[i];
            out << "    {\"fn\": \"" << row.label << "\"";
            if (row.j_geometric) {
                out << ", \"J_geometric\": " << std::setprecision(17) << *row.j_geometric;
            }
            if (row.j_radial) {
                out << ", \"J_radial\": " << std::setprecision(17) << *row.j_radial;
            }
            if (row.compromise) {
                out << ", \"radial_in_envelope\": " << *row.compromise;
            }
            if (!row.error.empty()) {
                out << ", \"error\": \"" << row.error << "\"";
            }
            out << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
        }
        out << "  ],\n  \"sorted_by_geometric_j\": [";
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            out << "\"" << sorted[i] << "\"" << (i + 1 < sorted.size() ? ", " : "");
        }
        out << "]\n}\n";
    }
    return kExitOk;
}

std::vector<PixelPoint> load_points(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::vector<PixelPoint> points;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        for (char &c : line) {
            if (c == ',' || c == ';') {
                c = ' ';
            }
        }
        std::istringstream ss(line);
        PixelPoint p;
        if (ss >> p.u >> p.v) {
            points.push_back(p);
        }
    }
    return points;
}

int cmd_undistort(const std::string &report_path, const std::string &points_path,
                  const std::string &method, const std::string &output) {
    const CalibrationReport report = load_report(report_path);
    const DistortionModel &model = report.model;
    if (method == "analytic" && !(model.mode == ModelMode::Piecewise ||
                                  ((model.mode == ModelMode::Radial ||
                                    model.mode == ModelMode::Geometric) &&
                                   (model.fn == FnKind::T5 || model.fn == FnKind::T6)))) {
        std::fprintf(stderr, "error: analytic undistortion needs fn 5|6 or a piecewise model\n");
        return kExitInputError;
    }
    if (model.mode == ModelMode::Decentering) {
        std::fprintf(stderr, "error: the decentering model is not supported by this command\n");
        return kExitInputError;
    }
    if (method == "approx" &&
        (model.mode == ModelMode::Piecewise || model.mode == ModelMode::DU)) {
        std::fprintf(stderr, "error: the approx method applies to radial/geometric models\n");
        return kExitInputError;
    }

    const std::vector<PixelPoint> points = load_points(points_path);
    std::ofstream out(output);
    if (!out) {
        throw ParseError("cannot write " + output);
    }
    out << "# u_d v_d x y u v redistort_err_px\n";
    out << std::setprecision(17);
    double max_err = 0.0;
    const ModelEvaluator forward(model, report.intrinsics);
    for (const PixelPoint &p : points) {
        const NormalizedPoint distorted = pixel_to_normalized(p, report.intrinsics);
        const NormalizedPoint undistorted = undistort_model(model, distorted, method);
        const PixelPoint pixel = normalized_to_pixel(undistorted, report.intrinsics);
        const PixelPoint redistorted = forward.distorted_pixel(undistorted);
        const double err = std::hypot(redistorted.u - p.u, redistorted.v - p.v);
        max_err = std::max(max_err, err);
        out << p.u << " " << p.v << " " << undistorted.x << " " << undistorted.y << " " << pixel.u
            << " " << pixel.v << " " << err << "\n";
    }
    std::printf("undistorted %zu points method=%s max_redistort_err=%.3e px%s\n", points.size(),
                method.c_str(), max_err, max_err > 1e-6 ? " (inexact method)" : "");
    return kExitOk;
}

int cmd_curves(const std::string &report_path, const std::string &output, int samples,
               const std::string &radial_report_path, const std::string &ellipse_output) {
    const CalibrationReport report = load_report(report_path);
    std::optional<CalibrationReport> radial;
    if (!radial_report_path.empty()) {
        radial = load_report(radial_report_path);
    }

    const double r_max = report.model.mode == ModelMode::Piecewise ? report.model.r_max : 1.0;
    const ModelEvaluator eval(report.model, report.intrinsics);
    std::optional<ModelEvaluator> radial_eval;
    if (radial) {
        radial_eval.emplace(radial->model, radial->intrinsics);
    }

    std::ofstream out(output);
    if (!out) {
        throw ParseError("cannot write " + output);
    }
    out << "# r f_x f_y" << (radial ? " f_radial" : "") << "\n";
    out << std::setprecision(17);
    for (int i = 0; i < samples; ++i) {
        const double r = samples == 1 ? 0.0 : r_max * i / (samples - 1);
        out << r << " " << eval.axis_gain(0, r) << " " << eval.axis_gain(1, r);
        if (radial_eval) {
            out << " " << radial_eval->axis_gain(0, r);
        }
        out << "\n";
    }

    const std::string ellipse_path =
        ellipse_output.empty() ? output + ".ellipse" : ellipse_output;
    std::ofstream ell(ellipse_path);
    if (!ell) {
        throw ParseError("cannot write " + ellipse_path);
    }
    // Circle of radius r_max traced through the model: the two axis gains
    // turn it into an ellipse-like curve.
    ell << "# theta x y x_d y_d\n";
    ell << std::setprecision(17);
    const int n_ellipse = std::max(samples, 16);
    for (int i = 0; i < n_ellipse; ++i) {
        const double theta = 2.0 * M_PI * i / n_ellipse;
        const NormalizedPoint p{r_max * std::cos(theta), r_max * std::sin(theta)};
        const PixelPoint d = eval.distorted_pixel(p);
        const NormalizedPoint dn = pixel_to_normalized(d, report.intrinsics);
        ell << theta << " " << p.x << " " << p.y << " " << dn.x << " " << dn.y << "\n";
    }
    std::printf("wrote %d curve samples to %s and the circle trace to %s\n", samples,
                output.c_str(), ellipse_path.c_str());
    return kExitOk;
}

int cmd_simulate(const std::string &config_path, const std::string &output,
                 const std::string &truth_output, std::optional<std::uint64_t> seed_override) {
    SimConfig config;
    if (!config_path.empty()) {
        config = load_sim_config(config_path);
    }
    if (seed_override) {
        config.seed = *seed_override;
    }
    const SimResult sim = simulate(config);
    save_dataset(sim.dataset, output);
    const std::string truth_path = truth_output.empty() ? output + ".truth.json" : truth_output;
    save_truth(sim.truth, truth_path);
    std::printf("simulated %zu views x %zu points -> %s (truth: %s)\n", sim.dataset.views.size(),
                sim.dataset.views.empty() ? std::size_t(0) : sim.dataset.views[0].points.size(),
                output.c_str(), truth_path.c_str());
    return kExitOk;
}

int cmd_import(const std::vector<std::string> &csv_paths, int width, int height,
               const std::string &output) {
    std::vector<std::filesystem::path> paths(csv_paths.begin(), csv_paths.end());
    const CalibrationDataset dataset = import_views_csv(paths, width, height);
    dataset.validate();
    save_dataset(dataset, output);
    std::printf("imported %zu views -> %s\n", dataset.views.size(), output.c_str());
    return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Planar camera calibration with two-axis lens distortion models"};
    app.require_subcommand(1);

    std::string cal_input, cal_output;
    ModelFlags cal_flags;
    bool cal_quiet = false;
    CLI::App *calibrate_cmd =
        app.add_subcommand("calibrate", "Fit a distortion model to a dataset");
    calibrate_cmd->add_option("input", cal_input, "Dataset JSON file")->required();
    calibrate_cmd->add_option("-o,--output", cal_output, "Report JSON file");
    calibrate_cmd->add_flag("--quiet", cal_quiet, "Suppress the summary line");
    add_model_flags(calibrate_cmd, cal_flags);

    std::string cmp_input, cmp_output;
    ModelFlags cmp_flags;
    CLI::App *compare_cmd =
        app.add_subcommand("compare", "Fit every catalog function in radial and geometric mode");
    compare_cmd->add_option("input", cmp_input, "Dataset JSON file")->required();
    compare_cmd->add_option("-o,--output", cmp_output, "Table JSON file");
    compare_cmd->add_option("--max-iter", cmp_flags.max_iter, "Refinement iteration cap");
    compare_cmd->add_option("--tol", cmp_flags.tol, "Refinement tolerance");
    compare_cmd->add_flag("--fix-skew", cmp_flags.fix_skew, "Constrain the skew to zero");

    std::string und_report, und_points, und_output;
    std::string und_method = "iterative";
    CLI::App *undistort_cmd =
        app.add_subcommand("undistort", "Undistort a pixel point list with a fitted model");
    undistort_cmd->add_option("report", und_report, "Report JSON file")->required();
    undistort_cmd->add_option("points", und_points, "Point list: 'u v' per line")->required();
    undistort_cmd->add_option("-o,--output", und_output, "Corrected point file")->required();
    undistort_cmd->add_option("--method", und_method, "analytic | iterative | approx")
        ->check(CLI::IsMember({"analytic", "iterative", "approx"}));

    std::string cur_report, cur_output, cur_radial, cur_ellipse;
    int cur_samples = 200;
    CLI::App *curves_cmd =
        app.add_subcommand("curves", "Sample the fitted axis-gain curves for plotting");
    curves_cmd->add_option("report", cur_report, "Report JSON file")->required();
    curves_cmd->add_option("-o,--output", cur_output, "Curve sample file")->required();
    curves_cmd->add_option("--samples", cur_samples, "Sample count")->check(CLI::PositiveNumber);
    curves_cmd->add_option("--radial", cur_radial, "Companion radial report for an f(r,k) column");
    curves_cmd->add_option("--ellipse-output", cur_ellipse,
                           "Circle-trace output (default: <output>.ellipse)");

    std::string sim_config, sim_output, sim_truth;
    std::uint64_t sim_seed = 0;
    bool sim_seed_set = false;
    CLI::App *simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    simulate_cmd->add_option("-c,--config", sim_config, "Simulation config JSON (defaults apply)");
    simulate_cmd->add_option("-o,--output", sim_output, "Dataset JSON file")->required();
    simulate_cmd->add_option("--truth-output", sim_truth,
                             "Truth sidecar (default: <output>.truth.json)");
    simulate_cmd->add_option("--seed", sim_seed, "Override the config seed")
        ->each([&sim_seed_set](const std::string &) { sim_seed_set = true; });

    std::vector<std::string> imp_csvs;
    std::vector<int> imp_size;
    std::string imp_output;
    CLI::App *import_cmd =
        app.add_subcommand("import", "Build a dataset from per-view 'id X Y u v' corner lists");
    import_cmd->add_option("csv", imp_csvs, "One corner list per view")->required();
    import_cmd->add_option("--image-size", imp_size, "Width and height in pixels")
        ->expected(2)
        ->required();
    import_cmd->add_option("-o,--output", imp_output, "Dataset JSON file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (calibrate_cmd->parsed()) {
            return cmd_calibrate(cal_input, cal_output, cal_flags, cal_quiet);
        }
        if (compare_cmd->parsed()) {
            return cmd_compare(cmp_input, cmp_output, cmp_flags);
        }
        if (undistort_cmd->parsed()) {
            return cmd_undistort(und_report, und_points, und_method, und_output);
        }
        if (curves_cmd->parsed()) {
            return cmd_curves(cur_report, cur_output, cur_samples, cur_radial, cur_ellipse);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(sim_config, sim_output, sim_truth,
                                sim_seed_set ? std::optional<std::uint64_t>(sim_seed)
                                             : std::nullopt);
        }
        if (import_cmd->parsed()) {
            return cmd_import(imp_csvs, imp_size[0], imp_size[1], imp_output);
        }
    } catch (const calib::Error &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    } catch (const std::exception &e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInputError;
    }
    return kExitOk;
}
