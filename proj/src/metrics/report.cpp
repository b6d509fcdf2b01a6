#include <filesystem>
#include <fstream>

#include "amc/errors.hpp"
#include "amc/metrics.hpp"

namespace amc {

namespace {

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(FormatError::Kind::io, "cannot open '" + path + "' for writing");
    out.precision(9);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw FormatError(FormatError::Kind::io, "failed writing '" + path + "'");
}

}  // namespace

void write_metrics_csv(const EvalReport& report, const std::string& path) {
    auto out = open_csv(path);
    out << "metric,value\n";
    out << "overall_accuracy," << report.overall_accuracy << '\n';
    out << "macro_f1," << report.macro_f1 << '\n';
    out << "kappa," << report.kappa << '\n';
    finish(out, path);
}

void write_confusion_csv(const ConfusionMatrix& confusion, const std::vector<std::string>& class_names,
                         const std::string& path) {
    if (class_names.size() != confusion.classes)
        throw DimensionError("write_confusion_csv: " + std::to_string(class_names.size()) + " names for " +
                             std::to_string(confusion.classes) + " classes");
    auto out = open_csv(path);
    for (std::size_t k = 0; k < class_names.size(); ++k) out << (k ? "," : "") << class_names[k];
    out << '\n';
    for (std::size_t t = 0; t < confusion.classes; ++t) {
        for (std::size_t p = 0; p < confusion.classes; ++p) out << (p ? "," : "") << confusion.at(t, p);
        out << '\n';
    }
    finish(out, path);
}

void write_per_snr_csv(const std::map<int, double>& per_snr, const std::string& path) {
    auto out = open_csv(path);
    out << "snr_db,accuracy\n";
    for (const auto& [snr, acc] : per_snr) out << snr << ',' << acc << '\n';
    finish(out, path);
}

void write_report(const EvalReport& report, const std::vector<std::string>& class_names, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path base(dir);
    write_metrics_csv(report, (base / "metrics.csv").string());
    write_confusion_csv(report.confusion, class_names, (base / "confusion.csv").string());
    write_per_snr_csv(report.per_snr_accuracy, (base / "per_snr_accuracy.csv").string());
}

}  // namespace amc
