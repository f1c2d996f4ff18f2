#pragma once

#include "calib/synthetic.hpp"

#include <filesystem>
#include <string>

namespace calib {

// Self-describing JSON files. Doubles are emitted with full round-trip
// precision, so load(save(x)) reproduces every field exactly.

void save_dataset(const CalibrationDataset &dataset, const std::filesystem::path &path);
CalibrationDataset load_dataset(const std::filesystem::path &path);

void save_truth(const SimTruth &truth, const std::filesystem::path &path);
SimTruth load_truth(const std::filesystem::path &path);

void save_report(const CalibrationReport &report, const std::filesystem::path &path);
CalibrationReport load_report(const std::filesystem::path &path);

SimConfig load_sim_config(const std::filesystem::path &path);
void save_sim_config(const SimConfig &config, const std::filesystem::path &path);

/// One view of plain corner data: lines of "id, X, Y, u, v" (comma or
/// whitespace separated; '#' starts a comment). Combine several views into
/// a dataset with the stated image size.
CalibrationView import_view_csv(const std::filesystem::path &path);
CalibrationDataset import_views_csv(const std::vector<std::filesystem::path> &paths, int width,
                                    int height);

std::string model_to_json_string(const DistortionModel &model);
DistortionModel model_from_json_string(const std::string &text);

} // namespace calib
