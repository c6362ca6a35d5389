#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vcmorph/conversion.hpp"

namespace vc {

/// Parsed `key = value` configuration with [section] headers.
/// Unknown keys are rejected (UsageError).
struct CliConfig {
    // [corpus]
    std::filesystem::path source_dir;
    std::filesystem::path target_dir;
    int sample_rate = 16000;
    std::size_t pair_limit = 0;
    bool normalize = true;

    // [features] / [model] / [em]
    ConversionConfig conversion;

    // [output]
    std::filesystem::path model_path = "model.json";
    std::filesystem::path output_dir = ".";

    // [experiment]
    std::vector<std::size_t> experiment_training_pairs = {2, 8};
    std::vector<int> experiment_gaussians = {1, 3, 5, 10};
    std::size_t experiment_eval_count = 4;
    std::filesystem::path experiment_csv = "experiment.csv";

    int verbosity = 1;
};

CliConfig parse_config_file(const std::filesystem::path& path);
CliConfig parse_config_text(const std::string& text);

}  // namespace vc
