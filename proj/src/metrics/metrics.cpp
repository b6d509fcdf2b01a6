#include "amc/metrics.hpp"

#include <numeric>

#include "amc/errors.hpp"

namespace amc {

std::size_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

std::size_t ConfusionMatrix::trace() const {
    std::size_t t = 0;
    for (std::size_t k = 0; k < classes; ++k) t += at(k, k);
    return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> pred, std::size_t classes) {
    if (truth.size() != pred.size())
        throw DimensionError("confusion_matrix: " + std::to_string(truth.size()) + " truth labels vs " +
                             std::to_string(pred.size()) + " predictions");
    ConfusionMatrix cm{classes, std::vector<std::size_t>(classes * classes, 0)};
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || pred[i] < 0 || static_cast<std::size_t>(truth[i]) >= classes ||
            static_cast<std::size_t>(pred[i]) >= classes)
            throw std::out_of_range("confusion_matrix: label outside [0, " + std::to_string(classes) + ") at index " +
                                    std::to_string(i));
        ++cm.counts[static_cast<std::size_t>(truth[i]) * classes + static_cast<std::size_t>(pred[i])];
    }
    return cm;
}

EvalReport compute_metrics(std::span<const int> truth, std::span<const int> pred, std::size_t classes) {
    EvalReport r;
    r.confusion = confusion_matrix(truth, pred, classes);
    const auto& cm = r.confusion;
    const double n = static_cast<double>(cm.total());
    if (n == 0) return r;

    r.overall_accuracy = static_cast<double>(cm.trace()) / n;

    std::vector<double> row(classes, 0), col(classes, 0);
    for (std::size_t t = 0; t < classes; ++t)
        for (std::size_t p = 0; p < classes; ++p) {
            row[t] += static_cast<double>(cm.at(t, p));
            col[p] += static_cast<double>(cm.at(t, p));
        }

    double f1_total = 0;
    for (std::size_t k = 0; k < classes; ++k) {
        const double tp = static_cast<double>(cm.at(k, k));
        // 2PR/(P+R) = 2TP / (predicted + actual)
        const double denom = row[k] + col[k];
        const double f1 = denom > 0 ? 2.0 * tp / denom : 0.0;
        r.per_class_f1.push_back(f1);
        f1_total += f1;
    }
    r.macro_f1 = f1_total / static_cast<double>(classes);

    double pe = 0;
    for (std::size_t k = 0; k < classes; ++k) pe += (row[k] / n) * (col[k] / n);
    const double po = r.overall_accuracy;
    if (pe >= 1.0)
        r.kappa = po >= 1.0 ? 1.0 : 0.0;
    else
        r.kappa = (po - pe) / (1.0 - pe);
    return r;
}

std::map<int, double> per_snr_accuracy(std::span<const int> truth, std::span<const int> pred,
                                       std::span<const int> snr_tags) {
    if (truth.size() != pred.size() || truth.size() != snr_tags.size())
        throw DimensionError("per_snr_accuracy: truth, pred and snr_tags must have equal length");
    std::map<int, std::pair<std::size_t, std::size_t>> tally;  // snr -> (correct, total)
    for (std::size_t i = 0; i < truth.size(); ++i) {
        auto& [correct, total] = tally[snr_tags[i]];
        correct += truth[i] == pred[i];
        ++total;
    }
    std::map<int, double> out;
    for (const auto& [snr, c] : tally) out[snr] = static_cast<double>(c.first) / static_cast<double>(c.second);
    return out;
}

}  // namespace amc
