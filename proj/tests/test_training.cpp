#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "amc/training.hpp"
#include "oracles.hpp"

using namespace amc;

namespace {

ModelConfig small_config(std::size_t len, std::size_t classes) {
    ModelConfig c;
    c.seq_len = len;
    c.num_classes = classes;
    c.mlp_dims = {len, 8, len};
    c.msm_filters_per_kernel = 2;
    c.backbone_channels = {8, 8, 8};
    c.classifier_hidden = {16, 16};
    return c;
}

// Class 0: positive DC on I; class 1: negative DC on I; small noise on top.
Dataset separable(std::size_t per_class, std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> noise(0.0f, 0.1f);
    Dataset ds;
    ds.class_names = {"pos", "neg"};
    ds.length = len;
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        SignalExample ex;
        ex.label = std::uint16_t(i % 2);
        ex.snr_db = 10;
        for (std::size_t k = 0; k < 2 * len; ++k) ex.iq.push_back((k < len ? (ex.label ? -1.0f : 1.0f) : 0.0f) + noise(rng));
        ds.examples.push_back(ex);
    }
    return ds;
}

}  // namespace

TEST_CASE("xavier init") {
    AmcNet<float> model(ModelConfig{});
    xavier_init(model, 11);
    for (const auto& p : model.parameters()) {
        if (p.name.ends_with(".bias") || p.name.ends_with(".beta"))
            for (float v : p.tensor.values()) CHECK(v == 0.0f);
        if (p.name.ends_with(".gamma"))
            for (float v : p.tensor.values()) CHECK(v == 1.0f);
    }
    const auto& w = model.parameter("classifier.fc1.weight");
    CHECK(w.shape() == Shape{512, 256});
    double mean = 0, sq = 0;
    for (float v : w.values()) mean += v, sq += double(v) * v;
    mean /= double(w.numel());
    const double var = sq / double(w.numel()) - mean * mean;
    CHECK(std::abs(var / (2.0 / (512 + 256)) - 1.0) < 0.1);
    const double bound = std::sqrt(6.0 / (512 + 256));
    for (float v : w.values()) CHECK(std::abs(v) <= bound);

    AmcNet<float> again(ModelConfig{});
    xavier_init(again, 11);
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        const auto a = model.parameters()[i].tensor.values(), b = again.parameters()[i].tensor.values();
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }

    CHECK(fan_in_out({512, 256}) == std::pair<std::size_t, std::size_t>{256, 512});
    CHECK(fan_in_out({64, 36, 3}) == std::pair<std::size_t, std::size_t>{108, 192});
    CHECK(fan_in_out({12, 1, 2, 5}) == std::pair<std::size_t, std::size_t>{10, 120});
}

TEST_CASE("adam first step, zero gradient and convergence") {
    auto p = Tensor::from({1}, {0.0f}, true);
    Adam<float> adam({p}, 1e-3);
    p.grad()[0] = 1.0f;
    adam.step();
    CHECK(p.values()[0] == doctest::Approx(-1e-3).epsilon(1e-6));
    CHECK(adam.steps() == 1);

    auto q = Tensor::from({3}, {0.5f, -1.0f, 2.0f}, true);
    Adam<float> still({q}, 1e-3);
    for (int i = 0; i < 5; ++i) still.step();
    CHECK(q.values()[0] == 0.5f);
    CHECK(q.values()[1] == -1.0f);
    CHECK(q.values()[2] == 2.0f);

    auto x = Tensor::from({1}, {1.0f}, true);
    Adam<float> opt({x}, 1e-2);
    for (int i = 0; i < 200; ++i) {
        x.zero_grad();
        sum(mul(x, x)).backward();
        opt.step();
    }
    CHECK(std::abs(x.values()[0]) < 0.1);

    auto frozen = Tensor::from({1}, {1.0f});
    Adam<float> broken({frozen}, 1e-3);
    CHECK_THROWS_AS(broken.step(), GraphError);
    CHECK_THROWS_AS(Adam<float>({x}, 0.0), ConfigError);
}

TEST_CASE("early stopping rule") {
    EarlyStopping stop(10);
    CHECK(stop.update(1.0));
    std::size_t epochs = 1;
    while (!stop.should_stop()) {
        stop.update(1.0 + 0.01 * double(epochs % 3));
        ++epochs;
    }
    CHECK(epochs == 11);
    CHECK(stop.best_epoch() == 1);

    EarlyStopping tol(2, 1e-6);
    tol.update(1.0);
    CHECK_FALSE(tol.update(1.0 - 1e-7));  // within tolerance: not an improvement
    CHECK(tol.update(0.9));
    CHECK(tol.best_epoch() == 3);
}

TEST_CASE("fit learns a separable problem and is reproducible") {
    const auto data = separable(24, 32, 1);
    const auto val = separable(8, 32, 2);
    TrainConfig cfg;
    cfg.batch_size = 16;
    cfg.max_epochs = 50;
    cfg.patience = 50;
    cfg.seed = 3;

    AmcNet<float> model(small_config(32, 2));
    xavier_init(model, 4);
    const auto result = fit(model, data, val, cfg);
    CHECK(result.history.size() == 50);
    CHECK(evaluate(model, data, 16).accuracy == 1.0);

    double best = result.history.front().val_loss;
    for (const auto& r : result.history) best = std::min(best, r.val_loss);
    CHECK(result.best_val_loss == best);
    CHECK(evaluate(model, val, cfg.batch_size).loss == doctest::Approx(best).epsilon(1e-9));
    CHECK(result.history[result.best_epoch - 1].val_loss == best);

    AmcNet<float> twin(small_config(32, 2));
    xavier_init(twin, 4);
    const auto again = fit(twin, data, val, cfg);
    REQUIRE(again.history.size() == result.history.size());
    for (std::size_t i = 0; i < result.history.size(); ++i) {
        CHECK(again.history[i].train_loss == result.history[i].train_loss);
        CHECK(again.history[i].val_loss == result.history[i].val_loss);
    }
    for (std::size_t i = 0; i < model.parameters().size(); ++i) {
        const auto a = model.parameters()[i].tensor.values(), b = twin.parameters()[i].tensor.values();
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("early stop in fit ends at patience and history matches epochs run") {
    const auto data = separable(16, 32, 5);
    TrainConfig cfg;
    cfg.batch_size = 8;
    cfg.max_epochs = 200;
    cfg.patience = 2;
    cfg.learning_rate = 0.05;  // large steps make the validation loss bounce
    AmcNet<float> model(small_config(32, 2));
    xavier_init(model, 6);
    const auto result = fit(model, data, separable(4, 32, 7), cfg);
    CHECK(result.history.size() <= 200);
    if (result.early_stopped) CHECK(result.history.size() == result.best_epoch + 2);
}

TEST_CASE("overfit capacity on 32 examples") {
    GeneratorConfig g;
    g.formats = {ModulationFormat::bpsk, ModulationFormat::qpsk, ModulationFormat::pam4, ModulationFormat::gfsk};
    g.snr_db = {18};
    g.per_class_per_snr = 8;
    g.length = 32;
    const auto data = generate_dataset(g);
    TrainConfig cfg;
    cfg.batch_size = 32;
    cfg.max_epochs = 300;
    cfg.patience = 300;
    AmcNet<float> model(small_config(32, 4));
    xavier_init(model, 8);
    double final_loss = 0;
    std::size_t epochs = 0;
    // train loss is reported under train-mode BN; stop as soon as it dips below the target
    try {
        fit(model, data, data, cfg, [&](const EpochRecord& r) {
            final_loss = r.train_loss;
            epochs = r.epoch;
            if (r.train_loss < 0.05) throw r;
        });
    } catch (const EpochRecord&) {
    }
    CHECK(final_loss < 0.05);
    CHECK(epochs <= 300);
}

TEST_CASE("fit and evaluate errors") {
    AmcNet<float> model(small_config(32, 2));
    Dataset empty;
    empty.length = 32;
    empty.class_names = {"pos", "neg"};
    CHECK_THROWS_AS(fit(model, empty, separable(2, 32, 1), TrainConfig{}), ConfigError);
    CHECK_THROWS_AS(evaluate(model, empty, 8), ConfigError);
    CHECK_THROWS_AS(fit(model, separable(2, 16, 1), separable(2, 16, 1), TrainConfig{}), DimensionError);
    TrainConfig bad;
    bad.patience = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("evaluate probabilities and history CSV") {
    AmcNet<float> model(small_config(32, 2));
    xavier_init(model, 9);
    const auto eval = evaluate(model, separable(3, 32, 1), 4, true);
    REQUIRE(eval.probabilities.size() == 6);
    for (const auto& p : eval.probabilities) CHECK(std::abs(p[0] + p[1] - 1.0) < 1e-6);

    const auto path = std::filesystem::temp_directory_path() / "amcnet_test_history.csv";
    write_history_csv({{1, 0.5, 0.6, 0.7}, {2, 0.4, 0.5, 0.8}}, path.string());
    std::ifstream in(path);
    std::string header, first;
    std::getline(in, header);
    std::getline(in, first);
    CHECK(header == "epoch,train_loss,val_loss,val_acc");
    CHECK(first == "1,0.5,0.6,0.7");
    std::filesystem::remove(path);
}
