// commands.hpp - the amcnet subcommands as library functions
//
// Each command writes human-readable progress to `log` and throws on failure
// (ConfigError for bad arguments, FormatError for unreadable inputs).
#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "amc/metrics.hpp"
#include "amc/training.hpp"

namespace amc {

struct GenerateOptions {
    std::string out;
    std::vector<std::string> formats;  // empty = all eleven
    int snr_min = -20;
    int snr_max = 18;
    int snr_step = 2;
    std::size_t per_class = 1000;
    std::uint64_t seed = 0;
    std::size_t length = 128;
    double max_cfo = 0.002;
    double max_sro_ppm = 100.0;
};

// Returns the number of examples written.
std::size_t cmd_generate(const GenerateOptions& options, std::ostream& log);

struct TrainOptions {
    std::string data;
    std::string config;  // optional run-config file
    std::string out;
    std::string history;  // default: <out>.history.csv
    bool no_acm = false;
    bool no_msm = false;
    bool no_ffm = false;
    std::optional<std::uint64_t> seed;
};

struct TrainSummary {
    std::size_t parameter_count = 0;
    FitResult fit;
    EvalReport validation;
    EvalReport test;
    std::string history_path;
};

TrainSummary cmd_train(const TrainOptions& options, std::ostream& log);

struct EvalOptions {
    std::string model;
    std::string data;
    std::string report_dir;
};

EvalReport cmd_eval(const EvalOptions& options, std::ostream& log);

struct InferOptions {
    std::string model;
    std::string input;
};

struct InferResult {
    std::size_t label = 0;
    std::string class_name;
    std::vector<double> probabilities;
};

// Prints "prediction: <name>" followed by one "<name> <probability>" line per class.
InferResult cmd_infer(const InferOptions& options, std::ostream& out);

}  // namespace amc
