// amcnet - generate datasets, train, evaluate and run inference from the shell.
//
// Exit codes: 0 success, 1 runtime/format/numeric failure, 2 bad arguments.
#include <CLI11.hpp>

#include <iostream>

#include "amc/commands.hpp"
#include "amc/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"AMC-Net automatic modulation classification"};
    app.require_subcommand(1);

    amc::GenerateOptions gen;
    auto* generate = app.add_subcommand("generate", "Synthesize a labelled IQ dataset");
    generate->add_option("--out", gen.out, "Output AMCD file")->required();
    generate->add_option("--formats", gen.formats, "Modulation formats (default: all)")->delimiter(',');
    generate->add_option("--snr-min", gen.snr_min, "Lowest SNR in dB");
    generate->add_option("--snr-max", gen.snr_max, "Highest SNR in dB");
    generate->add_option("--snr-step", gen.snr_step, "SNR step in dB");
    generate->add_option("--per-class", gen.per_class, "Examples per (format, SNR)");
    generate->add_option("--seed", gen.seed, "Random seed");
    generate->add_option("--length", gen.length, "Samples per example");
    generate->add_option("--max-cfo", gen.max_cfo, "Max |CFO| in cycles/sample");
    generate->add_option("--max-sro-ppm", gen.max_sro_ppm, "Max |SRO| in ppm");

    amc::TrainOptions train;
    std::uint64_t train_seed = 0;
    auto* train_cmd = app.add_subcommand("train", "Train a model on a dataset");
    train_cmd->add_option("--data", train.data, "Input AMCD file");
    train_cmd->add_option("--config", train.config, "Run-config file");
    train_cmd->add_option("--out", train.out, "Output checkpoint")->required();
    train_cmd->add_option("--history", train.history, "Training-history CSV");
    train_cmd->add_flag("--no-acm", train.no_acm, "Disable the adaptive correction module");
    train_cmd->add_flag("--no-msm", train.no_msm, "Disable the multi-scale module");
    train_cmd->add_flag("--no-ffm", train.no_ffm, "Disable the feature fusion module");
    auto* seed_opt = train_cmd->add_option("--seed", train_seed, "Random seed (overrides config)");

    amc::EvalOptions eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval_cmd->add_option("--model", eval.model, "Checkpoint")->required();
    eval_cmd->add_option("--data", eval.data, "Input AMCD file")->required();
    eval_cmd->add_option("--report-dir", eval.report_dir, "Directory for CSV reports")->required();

    amc::InferOptions infer;
    auto* infer_cmd = app.add_subcommand("infer", "Classify a single IQ example");
    infer_cmd->add_option("--model", infer.model, "Checkpoint")->required();
    infer_cmd->add_option("--input", infer.input, "Single-example AMCD file or raw 2xL float32 blob")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*generate) amc::cmd_generate(gen, std::cout);
        if (*train_cmd) {
            if (*seed_opt) train.seed = train_seed;
            amc::cmd_train(train, std::cout);
        }
        if (*eval_cmd) amc::cmd_eval(eval, std::cout);
        if (*infer_cmd) amc::cmd_infer(infer, std::cout);
    } catch (const amc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
