#include "calib/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace calib {

using nlohmann::json;

namespace {

json to_json(const Intrinsics &intr) {
    return json{{"alpha", intr.alpha},
                {"beta", intr.beta},
                {"gamma", intr.gamma},
                {"u0", intr.u0},
                {"v0", intr.v0}};
}

Intrinsics intrinsics_from_json(const json &j) {
    Intrinsics intr;
    intr.alpha = j.at("alpha").get<double>();
    intr.beta = j.at("beta").get<double>();
    intr.gamma = j.at("gamma").get<double>();
    intr.u0 = j.at("u0").get<double>();
    intr.v0 = j.at("v0").get<double>();
    return intr;
}

json to_json(const Extrinsics &extr) {
    return json{{"rotation_vec",
                 {extr.rotation_vec.x(), extr.rotation_vec.y(), extr.rotation_vec.z()}},
                {"translation",
                 {extr.translation.x(), extr.translation.y(), extr.translation.z()}}};
}

Extrinsics extrinsics_from_json(const json &j) {
    const auto &r = j.at("rotation_vec");
    const auto &t = j.at("translation");
    return Extrinsics::from_rotation_vec(
        {r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>()},
        {t.at(0).get<double>(), t.at(1).get<double>(), t.at(2).get<double>()});
}

json to_json(const DistortionModel &model) {
    json j{{"mode", model_mode_name(model.mode)}};
    if (model.mode == ModelMode::None) {
        return j;
    }
    if (model.mode != ModelMode::Decentering) {
        std::string fn = fn_kind_name(model.fn);
        if (model.fn == FnKind::PolyEven) {
            fn += std::to_string(model.poly_terms);
        }
        j["fn"] = fn;
    }
    j["k1"] = model.k1;
    if (!model.k2.empty()) {
        j["k2"] = model.k2;
    }
    if (model.mode == ModelMode::Geometric || model.mode == ModelMode::Radial) {
        j["formulation"] = formulation_name(model.formulation);
    }
    if (model.mode == ModelMode::Piecewise) {
        j["segments"] = model.segments;
        j["r_max"] = model.r_max;
    }
    if (model.mode == ModelMode::Decentering) {
        j["pixel_radius"] = model.decentering_pixel_radius;
    }
    return j;
}

DistortionModel model_from_json(const json &j) {
    DistortionModel model;
    model.mode = model_mode_from_name(j.at("mode").get<std::string>());
    if (model.mode == ModelMode::None) {
        model.reset_params();
        return model;
    }
    if (model.mode == ModelMode::Decentering) {
        model.fn = FnKind::Decentering;
        model.decentering_pixel_radius = j.value("pixel_radius", false);
    } else {
        std::size_t terms = 0;
        model.fn = fn_kind_from_name(j.at("fn").get<std::string>(), &terms);
        model.poly_terms = terms;
    }
    if (j.contains("formulation")) {
        model.formulation = formulation_from_name(j.at("formulation").get<std::string>());
    } else if (model.mode == ModelMode::DU) {
        model.formulation = Formulation::DU;
    }
    if (model.mode == ModelMode::Piecewise) {
        model.segments = j.at("segments").get<int>();
        model.r_max = j.at("r_max").get<double>();
    }
    model.reset_params();
    model.k1 = j.at("k1").get<std::vector<double>>();
    if (j.contains("k2")) {
        model.k2 = j.at("k2").get<std::vector<double>>();
    }
    if (model.k1.size() + model.k2.size() != model.param_count()) {
        throw ParseError("model coefficient counts do not match the declared kind");
    }
    return model;
}

json parse_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw ParseError("cannot parse " + path.string() + ": " + e.what());
    }
}

void write_file(const json &j, const std::filesystem::path &path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot write " + path.string());
    }
    out << j.dump(2) << "\n";
}

} // namespace

void save_dataset(const CalibrationDataset &dataset, const std::filesystem::path &path) {
    json views = json::array();
    for (const auto &view : dataset.views) {
        json points = json::array();
        for (const auto &obs : view.points) {
            points.push_back(json{{"id", obs.id},
                                  {"world", {obs.X, obs.Y}},
                                  {"image", {obs.image.u, obs.image.v}}});
        }
        views.push_back(json{{"points", std::move(points)}});
    }
    write_file(json{{"image_size", {dataset.width, dataset.height}}, {"views", std::move(views)}},
               path);
}

CalibrationDataset load_dataset(const std::filesystem::path &path) {
    const json j = parse_file(path);
    try {
        CalibrationDataset dataset;
        dataset.width = j.at("image_size").at(0).get<int>();
        dataset.height = j.at("image_size").at(1).get<int>();
        for (const auto &jv : j.at("views")) {
            CalibrationView view;
            for (const auto &jp : jv.at("points")) {
                Observation obs;
                obs.id = jp.at("id").get<int>();
                obs.X = jp.at("world").at(0).get<double>();
                obs.Y = jp.at("world").at(1).get<double>();
                obs.image.u = jp.at("image").at(0).get<double>();
                obs.image.v = jp.at("image").at(1).get<double>();
                view.points.push_back(obs);
            }
            dataset.views.push_back(std::move(view));
        }
        return dataset;
    } catch (const json::exception &e) {
        throw ParseError("malformed dataset " + path.string() + ": " + e.what());
    }
}

void save_truth(const SimTruth &truth, const std::filesystem::path &path) {
    json extr = json::array();
    for (const auto &e : truth.extrinsics) {
        extr.push_back(to_json(e));
    }
    write_file(json{{"intrinsics", to_json(truth.intrinsics)},
                    {"extrinsics", std::move(extr)},
                    {"model", to_json(truth.model)},
                    {"noise_sigma", truth.noise_sigma},
                    {"seed", truth.seed}},
               path);
}

SimTruth load_truth(const std::filesystem::path &path) {
    const json j = parse_file(path);
    try {
        SimTruth truth;
        truth.intrinsics = intrinsics_from_json(j.at("intrinsics"));
        for (const auto &je : j.at("extrinsics")) {
            truth.extrinsics.push_back(extrinsics_from_json(je));
        }
        truth.model = model_from_json(j.at("model"));
        truth.noise_sigma = j.at("noise_sigma").get<double>();
        truth.seed = j.at("seed").get<std::uint64_t>();
        return truth;
    } catch (const json::exception &e) {
        throw ParseError("malformed truth file " + path.string() + ": " + e.what());
    }
}

void save_report(const CalibrationReport &report, const std::filesystem::path &path) {
    json extr = json::array();
    for (const auto &e : report.extrinsics) {
        extr.push_back(to_json(e));
    }
    write_file(json{{"intrinsics", to_json(report.intrinsics)},
                    {"extrinsics", std::move(extr)},
                    {"model", to_json(report.model)},
                    {"j_initial", report.j_initial},
                    {"j_final", report.j_final},
                    {"rms", report.rms},
                    {"per_point_residuals", report.per_point_residuals},
                    {"iterations", report.iterations},
                    {"converged", report.converged}},
               path);
}

CalibrationReport load_report(const std::filesystem::path &path) {
    const json j = parse_file(path);
    try {
        CalibrationReport report;
        report.intrinsics = intrinsics_from_json(j.at("intrinsics"));
        for (const auto &je : j.at("extrinsics")) {
            report.extrinsics.push_back(extrinsics_from_json(je));
        }
        report.model = model_from_json(j.at("model"));
        report.j_initial = j.at("j_initial").get<double>();
        report.j_final = j.at("j_final").get<double>();
        report.rms = j.at("rms").get<double>();
        report.per_point_residuals = j.at("per_point_residuals").get<std::vector<double>>();
        report.iterations = j.at("iterations").get<int>();
        report.converged = j.at("converged").get<bool>();
        return report;
    } catch (const json::exception &e) {
        throw ParseError("malformed report " + path.string() + ": " + e.what());
    }
}

SimConfig load_sim_config(const std::filesystem::path &path) {
    const json j = parse_file(path);
    try {
        SimConfig config;
        if (j.contains("grid")) {
            const auto &g = j.at("grid");
            config.grid_rows = g.value("rows", config.grid_rows);
            config.grid_cols = g.value("cols", config.grid_cols);
            config.square_size = g.value("square_size", config.square_size);
        }
        if (j.contains("image_size")) {
            config.width = j.at("image_size").at(0).get<int>();
            config.height = j.at("image_size").at(1).get<int>();
        }
        if (j.contains("intrinsics")) {
            config.intrinsics = intrinsics_from_json(j.at("intrinsics"));
        }
        config.views = j.value("views", config.views);
        if (j.contains("poses")) {
            for (const auto &jp : j.at("poses")) {
                PoseSpec pose;
                const auto &r = jp.at("rotation_vec");
                const auto &t = jp.at("translation");
                pose.rotation_vec = {r.at(0).get<double>(), r.at(1).get<double>(),
                                     r.at(2).get<double>()};
                pose.translation = {t.at(0).get<double>(), t.at(1).get<double>(),
                                    t.at(2).get<double>()};
                config.poses.push_back(pose);
            }
        }
        if (j.contains("pose_ranges")) {
            const auto &r = j.at("pose_ranges");
            config.ranges.tilt_max_deg = r.value("tilt_max_deg", config.ranges.tilt_max_deg);
            config.ranges.twist_max_deg = r.value("twist_max_deg", config.ranges.twist_max_deg);
            config.ranges.distance_min = r.value("distance_min", config.ranges.distance_min);
            config.ranges.distance_max = r.value("distance_max", config.ranges.distance_max);
            config.ranges.offset_max = r.value("offset_max", config.ranges.offset_max);
        }
        if (j.contains("model")) {
            config.model = model_from_json(j.at("model"));
        }
        config.noise_sigma = j.value("noise_sigma", config.noise_sigma);
        config.seed = j.value("seed", config.seed);
        config.margin_px = j.value("margin_px", config.margin_px);
        return config;
    } catch (const json::exception &e) {
        throw ParseError("malformed simulation config " + path.string() + ": " + e.what());
    }
}

void save_sim_config(const SimConfig &config, const std::filesystem::path &path) {
    json j{{"grid",
            {{"rows", config.grid_rows},
             {"cols", config.grid_cols},
             {"square_size", config.square_size}}},
           {"image_size", {config.width, config.height}},
           {"intrinsics", to_json(config.intrinsics)},
           {"views", config.views},
           {"model", to_json(config.model)},
           {"noise_sigma", config.noise_sigma},
           {"seed", config.seed},
           {"margin_px", config.margin_px},
           {"pose_ranges",
            {{"tilt_max_deg", config.ranges.tilt_max_deg},
             {"twist_max_deg", config.ranges.twist_max_deg},
             {"distance_min", config.ranges.distance_min},
             {"distance_max", config.ranges.distance_max},
             {"offset_max", config.ranges.offset_max}}}};
    if (!config.poses.empty()) {
        json poses = json::array();
        for (const auto &pose : config.poses) {
            poses.push_back(
                json{{"rotation_vec",
                      {pose.rotation_vec.x(), pose.rotation_vec.y(), pose.rotation_vec.z()}},
                     {"translation",
                      {pose.translation.x(), pose.translation.y(), pose.translation.z()}}});
        }
        j["poses"] = std::move(poses);
    }
    write_file(j, path);
}

CalibrationView import_view_csv(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    CalibrationView view;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        for (char &c : line) {
            if (c == ',' || c == ';' || c == '\t') {
                c = ' ';
            }
        }
        std::istringstream ss(line);
        Observation obs;
        if (!(ss >> obs.id)) {
            continue; // blank or comment-only line
        }
        if (!(ss >> obs.X >> obs.Y >> obs.image.u >> obs.image.v)) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) +
                             ": expected 'id X Y u v'");
        }
        view.points.push_back(obs);
    }
    return view;
}

CalibrationDataset import_views_csv(const std::vector<std::filesystem::path> &paths, int width,
                                    int height) {
    CalibrationDataset dataset;
    dataset.width = width;
    dataset.height = height;
    for (const auto &path : paths) {
        dataset.views.push_back(import_view_csv(path));
    }
    return dataset;
}

std::string model_to_json_string(const DistortionModel &model) { return to_json(model).dump(); }

DistortionModel model_from_json_string(const std::string &text) {
    return model_from_json(json::parse(text));
}

} // namespace calib
