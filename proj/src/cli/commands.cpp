#include "amc/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <iomanip>

#include "amc/checkpoint.hpp"
#include "amc/run_config.hpp"
#include "../common/binary.hpp"

namespace amc {

namespace {

std::vector<int> labels_of(const Dataset& ds) {
    std::vector<int> out;
    out.reserve(ds.size());
    for (const auto& ex : ds.examples) out.push_back(ex.label);
    return out;
}

std::vector<int> snrs_of(const Dataset& ds) {
    std::vector<int> out;
    out.reserve(ds.size());
    for (const auto& ex : ds.examples) out.push_back(ex.snr_db);
    return out;
}

EvalReport report_for(AmcNet<float>& model, const Dataset& ds, std::size_t batch_size) {
    const auto eval = evaluate(model, ds, batch_size);
    const auto truth = labels_of(ds);
    auto report = compute_metrics(truth, eval.predictions, model.config().num_classes);
    report.per_snr_accuracy = per_snr_accuracy(truth, eval.predictions, snrs_of(ds));
    return report;
}

Dataset read_input_dataset(const std::string& path) {
    if (!std::filesystem::exists(path)) throw FormatError(FormatError::Kind::io, "dataset not found: " + path);
    return read_dataset(path);
}

}  // namespace

std::size_t cmd_generate(const GenerateOptions& options, std::ostream& log) {
    if (options.out.empty()) throw ConfigError("generate: --out is required");
    if (options.snr_step <= 0) throw ConfigError("generate: --snr-step must be positive");
    if (options.snr_max < options.snr_min) throw ConfigError("generate: --snr-max must be >= --snr-min");
    if (options.snr_min < -32768 || options.snr_max > 32767) throw ConfigError("generate: SNR outside i16 range");
    if (options.per_class < 1) throw ConfigError("generate: --per-class must be >= 1");

    GeneratorConfig gen;
    if (options.formats.empty())
        gen.formats.assign(all_formats().begin(), all_formats().end());
    else
        for (const auto& name : options.formats) gen.formats.push_back(parse_format(name));
    for (int snr = options.snr_min; snr <= options.snr_max; snr += options.snr_step) gen.snr_db.push_back(snr);
    gen.per_class_per_snr = options.per_class;
    gen.seed = options.seed;
    gen.length = options.length;
    gen.max_cfo = options.max_cfo;
    gen.max_sro_ppm = options.max_sro_ppm;

    const auto ds = generate_dataset(gen);
    write_dataset(ds, options.out);
    log << "wrote " << ds.size() << " examples (" << ds.class_names.size() << " classes, " << gen.snr_db.size()
        << " SNRs, L = " << ds.length << ") to " << options.out << '\n';
    return ds.size();
}

TrainSummary cmd_train(const TrainOptions& options, std::ostream& log) {
    if (options.out.empty()) throw ConfigError("train: --out is required");
    RunConfig run = options.config.empty() ? RunConfig{} : load_run_config(options.config);
    const std::string data_path = options.data.empty() ? run.data_path : options.data;
    if (data_path.empty()) throw ConfigError("train: no dataset given (--data or paths.data)");
    if (options.no_acm) run.model.use_acm = false;
    if (options.no_msm) run.model.use_msm = false;
    if (options.no_ffm) run.model.use_ffm = false;
    if (options.seed) run.train.seed = *options.seed;

    const Dataset ds = read_input_dataset(data_path);
    if (ds.length != run.model.seq_len)
        throw ConfigError("train: dataset L = " + std::to_string(ds.length) + " but model seq_len = " +
                          std::to_string(run.model.seq_len));
    run.model.num_classes = ds.class_names.size();
    run.model.class_names = ds.class_names;

    const auto split = split_dataset(ds, SplitRatios{}, run.train.seed);
    for (const auto& w : split.warnings) log << "warning: " << w << '\n';

    AmcNet<float> model(run.model);
    xavier_init(model, run.train.seed);
    TrainSummary summary;
    summary.parameter_count = model.parameter_count();
    log << "parameters: " << summary.parameter_count << '\n';
    log << "split: train " << split.train.size() << ", val " << split.val.size() << ", test " << split.test.size()
        << '\n';

    summary.fit = fit(model, split.train, split.val, run.train, [&](const EpochRecord& r) {
        log << "epoch " << r.epoch << "  train_loss " << std::setprecision(5) << r.train_loss << "  val_loss "
            << r.val_loss << "  val_acc " << r.val_acc << '\n'
            << std::flush;
    });
    log << "best epoch " << summary.fit.best_epoch << " (val_loss " << summary.fit.best_val_loss << ")\n";

    save_checkpoint(model, options.out);
    summary.history_path = !options.history.empty()        ? options.history
                           : !run.history_path.empty()     ? run.history_path
                                                           : options.out + ".history.csv";
    write_history_csv(summary.fit.history, summary.history_path);

    summary.validation = report_for(model, split.val, run.train.batch_size);
    log << "validation: OA " << summary.validation.overall_accuracy << "  macro-F1 " << summary.validation.macro_f1
        << "  kappa " << summary.validation.kappa << '\n';
    if (!split.test.examples.empty()) {
        summary.test = report_for(model, split.test, run.train.batch_size);
        log << "test: OA " << summary.test.overall_accuracy << "  macro-F1 " << summary.test.macro_f1 << "  kappa "
            << summary.test.kappa << '\n';
    }
    return summary;
}

EvalReport cmd_eval(const EvalOptions& options, std::ostream& log) {
    if (options.report_dir.empty()) throw ConfigError("eval: --report-dir is required");
    auto model = load_checkpoint(options.model);
    const Dataset ds = read_input_dataset(options.data);
    const auto& cfg = model.config();
    if (ds.length != cfg.seq_len)
        throw ConfigError("eval: dataset L = " + std::to_string(ds.length) + " but checkpoint expects " +
                          std::to_string(cfg.seq_len));
    if (ds.class_names.size() != cfg.num_classes)
        throw ConfigError("eval: dataset has " + std::to_string(ds.class_names.size()) +
                          " classes but checkpoint has " + std::to_string(cfg.num_classes));
    auto report = report_for(model, ds, 128);
    std::vector<std::string> names = ds.class_names;
    write_report(report, names, options.report_dir);
    log << "OA " << report.overall_accuracy << "  macro-F1 " << report.macro_f1 << "  kappa " << report.kappa << '\n';
    log << "reports written to " << options.report_dir << '\n';
    return report;
}

InferResult cmd_infer(const InferOptions& options, std::ostream& out) {
    auto model = load_checkpoint(options.model);
    const std::size_t len = model.config().seq_len;
    const std::string bytes = detail::read_file(options.input);
    std::vector<float> iq;
    if (bytes.starts_with("AMCD")) {
        const auto ds = decode_dataset(bytes);
        if (ds.size() != 1)
            throw ConfigError("infer: AMCD input must hold exactly one example, found " + std::to_string(ds.size()));
        if (ds.length != len)
            throw ConfigError("infer: input has L = " + std::to_string(ds.length) + ", model expects L = " +
                              std::to_string(len));
        iq = ds.examples.front().iq;
    } else {
        const std::size_t expected = 2 * len * sizeof(float);
        if (bytes.size() != expected)
            throw ConfigError("infer: raw input must be 2 x L float32 = " + std::to_string(expected) +
                              " bytes for expected L = " + std::to_string(len) + ", got " +
                              std::to_string(bytes.size()) + " bytes");
        detail::ByteReader r(bytes, "raw input");
        iq.resize(2 * len);
        for (auto& v : iq) v = r.f32();
    }

    NoGradGuard no_grad;
    const auto probs = softmax(model.forward(Tensor::from({1, 2, len}, std::move(iq)), BatchNormMode::eval));
    InferResult result;
    for (float p : probs.values()) result.probabilities.push_back(p);
    result.label = static_cast<std::size_t>(
        std::max_element(result.probabilities.begin(), result.probabilities.end()) - result.probabilities.begin());
    result.class_name = model.config().class_name(result.label);

    out << "prediction: " << result.class_name << '\n';
    out << std::setprecision(9);
    for (std::size_t k = 0; k < result.probabilities.size(); ++k)
        out << model.config().class_name(k) << ' ' << result.probabilities[k] << '\n';
    return result;
}

}  // namespace amc
