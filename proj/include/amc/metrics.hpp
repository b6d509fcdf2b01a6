// metrics.hpp - overall accuracy, macro-F1, Cohen's kappa, per-SNR accuracy
#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace amc {

// counts[t * classes + p]: examples of true class t predicted as p.
struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts;

    std::size_t at(std::size_t truth, std::size_t pred) const { return counts[truth * classes + pred]; }
    std::size_t total() const;
    std::size_t trace() const;
};

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t classes);

struct EvalReport {
    double overall_accuracy = 0;
    double macro_f1 = 0;
    double kappa = 0;
    std::vector<double> per_class_f1;
    std::map<int, double> per_snr_accuracy;
    ConfusionMatrix confusion;
};

// Per-class F1 is 2PR/(P+R), taken as 0 when undefined. Kappa is
// (p_o - p_e) / (1 - p_e); when p_e = 1 it is 1 for perfect agreement, else 0.
EvalReport compute_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t classes);

// Accuracy per SNR tag; tags with no examples are absent.
std::map<int, double> per_snr_accuracy(std::span<const int> truth, std::span<const int> pred,
                                       std::span<const int> snr_tags);

// metrics.csv (metric,value), confusion.csv (class-name header + K rows),
// per_snr_accuracy.csv (snr_db,accuracy).
void write_metrics_csv(const EvalReport& report, const std::string& path);
void write_confusion_csv(const ConfusionMatrix& confusion, const std::vector<std::string>& class_names,
                         const std::string& path);
void write_per_snr_csv(const std::map<int, double>& per_snr, const std::string& path);
void write_report(const EvalReport& report, const std::vector<std::string>& class_names, const std::string& dir);

}  // namespace amc
