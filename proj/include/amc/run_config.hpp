// run_config.hpp - flat key=value run configuration
//
// One `key = value` per line, '#' starts a comment. Keys are grouped by
// prefix: model.*, train.*, channel.*, paths.*. Unknown keys are rejected.
// List values are comma-separated; booleans are true/false.

#pragma once

#include <string>
#include <vector>

#include "amc/model.hpp"
#include "amc/training.hpp"

namespace amc {

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
    double max_cfo = 0.002;
    double max_sro_ppm = 100.0;
    std::string data_path;
    std::string model_path;
    std::string history_path;
    std::string report_dir;

    bool operator==(const RunConfig&) const = default;
};

// Every recognised key, in serialization order.
const std::vector<std::string>& run_config_keys();

RunConfig parse_run_config(const std::string& text);
std::string serialize_run_config(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

}  // namespace amc
