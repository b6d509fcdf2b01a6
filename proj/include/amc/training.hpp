// training.hpp - initialization, Adam, early stopping and the epoch loop
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "amc/datagen.hpp"
#include "amc/model.hpp"

namespace amc {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t batch_size = 128;
    std::size_t patience = 10;
    std::size_t max_epochs = 200;
    std::uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // A validation loss counts as an improvement only if it beats the best by more than this.
    double improvement_tolerance = 1e-6;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

// Xavier-uniform weights and kernels (bound sqrt(6 / (fan_in + fan_out))),
// zero biases, BN gamma 1 / beta 0, running moments reset.
template <typename T>
void xavier_init(AmcNet<T>& model, std::uint64_t seed);

// (fan_in, fan_out) of a weight shape: [out x in] or [out x in x k...].
std::pair<std::size_t, std::size_t> fan_in_out(const Shape& shape);

template <typename T>
class Adam {
public:
    Adam(std::vector<BasicTensor<T>> params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
         double epsilon = 1e-8);

    // One bias-corrected update from the current grads. Throws GraphError if
    // a parameter carries no gradient buffer.
    void step();
    std::size_t steps() const { return steps_; }
    const std::vector<std::vector<T>>& first_moments() const { return m_; }
    const std::vector<std::vector<T>>& second_moments() const { return v_; }

private:
    std::vector<BasicTensor<T>> params_;
    std::vector<std::vector<T>> m_, v_;
    double lr_, beta1_, beta2_, eps_;
    std::size_t steps_ = 0;
};

// Patience rule over a stream of validation losses.
class EarlyStopping {
public:
    EarlyStopping(std::size_t patience, double tolerance = 1e-6);

    // Records one epoch; returns true when it is a new best.
    bool update(double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    std::size_t epochs_seen() const { return epochs_; }
    std::size_t best_epoch() const { return best_epoch_; }  // 1-based, 0 before any update
    double best_loss() const { return best_; }

private:
    std::size_t patience_;
    double tolerance_;
    std::size_t epochs_ = 0;
    std::size_t best_epoch_ = 0;
    std::size_t since_best_ = 0;
    double best_;
};

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0;
    double val_loss = 0;
    double val_acc = 0;
};

struct FitResult {
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0;
    bool early_stopped = false;
};

struct Batch {
    Tensor inputs;            // [B x 2 x L]
    std::vector<int> labels;  // B
};

Batch make_batch(const Dataset& dataset, std::span<const std::size_t> indices);

struct Evaluation {
    double loss = 0;
    double accuracy = 0;
    std::vector<int> predictions;
    std::vector<std::vector<float>> probabilities;  // filled only on request
};

// Eval-mode pass over the whole dataset in chunks of `batch_size`.
Evaluation evaluate(AmcNet<float>& model, const Dataset& dataset, std::size_t batch_size,
                    bool keep_probabilities = false);

// Shuffled mini-batch training with early stopping on validation loss; the
// best-validation state is restored before returning. A trailing batch of a
// single example is skipped (train-mode BN needs two).
FitResult fit(AmcNet<float>& model, const Dataset& train, const Dataset& val, const TrainConfig& config,
              const std::function<void(const EpochRecord&)>& on_epoch = {});

void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path);

}  // namespace amc
