#include <algorithm>
#include <fstream>
#include <numeric>
#include <optional>

#include "amc/errors.hpp"
#include "amc/training.hpp"

namespace amc {

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw ConfigError("train: learning_rate must be positive");
    if (batch_size < 2) throw ConfigError("train: batch_size must be at least 2");
    if (patience < 1) throw ConfigError("train: patience must be at least 1");
    if (max_epochs < 1) throw ConfigError("train: max_epochs must be at least 1");
    if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw ConfigError("train: betas must lie in [0, 1)");
    if (!(epsilon > 0)) throw ConfigError("train: epsilon must be positive");
    if (!(improvement_tolerance >= 0)) throw ConfigError("train: improvement_tolerance must be nonnegative");
}

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices) {
    const std::size_t len = dataset.length;
    std::vector<float> values(indices.size() * 2 * len);
    Batch batch;
    batch.labels.reserve(indices.size());
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto& ex = dataset.examples.at(indices[b]);
        if (ex.iq.size() != 2 * len)
            throw DimensionError("make_batch: example " + std::to_string(indices[b]) + " has " +
                                 std::to_string(ex.iq.size()) + " samples, expected " + std::to_string(2 * len));
        std::copy(ex.iq.begin(), ex.iq.end(), values.begin() + static_cast<std::ptrdiff_t>(b * 2 * len));
        batch.labels.push_back(ex.label);
    }
    batch.inputs = Tensor::from({indices.size(), 2, len}, std::move(values));
    return batch;
}

Evaluation evaluate(AmcNet<float>& model, const Dataset& dataset, std::size_t batch_size, bool keep_probabilities) {
    if (dataset.examples.empty()) throw ConfigError("evaluate: empty dataset");
    NoGradGuard no_grad;
    Evaluation result;
    double loss_total = 0;
    std::size_t correct = 0;
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t stop = std::min(order.size(), start + batch_size);
        auto batch = make_batch(dataset, std::span(order).subspan(start, stop - start));
        auto logits = model.forward(batch.inputs, BatchNormMode::eval);
        loss_total += static_cast<double>(cross_entropy(logits, batch.labels).item()) * (stop - start);
        const std::size_t classes = logits.dim(1);
        auto z = logits.values();
        std::optional<Tensor> probs;
        if (keep_probabilities) probs = softmax(logits);
        for (std::size_t b = 0; b < stop - start; ++b) {
            const float* row = z.data() + b * classes;
            const int pred = static_cast<int>(std::max_element(row, row + classes) - row);
            result.predictions.push_back(pred);
            if (pred == batch.labels[b]) ++correct;
            if (probs) {
                auto p = probs->values().subspan(b * classes, classes);
                result.probabilities.emplace_back(p.begin(), p.end());
            }
        }
    }
    result.loss = loss_total / static_cast<double>(dataset.size());
    result.accuracy = static_cast<double>(correct) / static_cast<double>(dataset.size());
    return result;
}

FitResult fit(AmcNet<float>& model, const Dataset& train, const Dataset& val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch) {
    config.validate();
    if (train.examples.empty()) throw ConfigError("fit: empty training set");
    if (val.examples.empty()) throw ConfigError("fit: empty validation set");
    if (train.length != model.config().seq_len || val.length != model.config().seq_len)
        throw DimensionError("fit: dataset length " + std::to_string(train.length) + " does not match model L = " +
                             std::to_string(model.config().seq_len));

    std::vector<Tensor> params;
    for (auto& p : model.parameters()) params.push_back(p.tensor);
    Adam<float> optimizer(params, config.learning_rate, config.beta1, config.beta2, config.epsilon);
    EarlyStopping stopper(config.patience, config.improvement_tolerance);

    FitResult result;
    StateDict<float> best_state = model.state();
    std::vector<std::size_t> order(train.size());
    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(mix_seed(config.seed, epoch));
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng() % (i + 1)]);

        double loss_total = 0;
        std::size_t seen = 0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            if (stop - start < 2) continue;
            auto batch = make_batch(train, std::span(order).subspan(start, stop - start));
            model.zero_grad();
            auto loss = cross_entropy(model.forward(batch.inputs, BatchNormMode::train), batch.labels);
            loss.backward();
            optimizer.step();
            loss_total += static_cast<double>(loss.item()) * (stop - start);
            seen += stop - start;
        }

        const auto eval = evaluate(model, val, config.batch_size);
        EpochRecord record{epoch, loss_total / static_cast<double>(std::max<std::size_t>(seen, 1)), eval.loss,
                           eval.accuracy};
        result.history.push_back(record);
        if (stopper.update(eval.loss)) best_state = model.state();
        if (on_epoch) on_epoch(record);
        if (stopper.should_stop()) {
            result.early_stopped = true;
            break;
        }
    }
    model.load_state(best_state);
    result.best_epoch = stopper.best_epoch();
    result.best_val_loss = stopper.best_loss();
    return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError(FormatError::Kind::io, "cannot open '" + path + "' for writing");
    out.precision(9);
    out << "epoch,train_loss,val_loss,val_acc\n";
    for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.val_acc << '\n';
    out.flush();
    if (!out) throw FormatError(FormatError::Kind::io, "failed writing '" + path + "'");
}

}  // namespace amc
