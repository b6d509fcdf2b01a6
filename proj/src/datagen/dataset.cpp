#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <thread>

#include "amc/datagen.hpp"
#include "amc/errors.hpp"

namespace amc {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    return splitmix64(h ^ c);
}

std::vector<int> default_snr_grid() {
    std::vector<int> grid;
    for (int snr = -20; snr <= 18; snr += 2) grid.push_back(snr);
    return grid;
}

unsigned thread_count_from_env() {
    const char* env = std::getenv("AMCNET_THREADS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("AMCNET_THREADS must be an integer >= 1, got '" + std::string(env) + "'");
    return static_cast<unsigned>(v);
}

std::map<std::pair<int, int>, std::size_t> Dataset::cell_counts() const {
    std::map<std::pair<int, int>, std::size_t> counts;
    for (const auto& ex : examples) ++counts[{ex.label, ex.snr_db}];
    return counts;
}

std::size_t Dataset::count(int label, int snr_db) const {
    const auto counts = cell_counts();
    auto it = counts.find({label, snr_db});
    return it == counts.end() ? 0 : it->second;
}

std::vector<int> Dataset::snr_values() const {
    std::set<int> values;
    for (const auto& ex : examples) values.insert(ex.snr_db);
    return {values.begin(), values.end()};
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < examples.size(); ++i) {
        const auto& ex = examples[i];
        if (ex.label >= class_names.size())
            throw FormatError(FormatError::Kind::bad_label, "example " + std::to_string(i) + " has label " +
                                                                std::to_string(ex.label) + " but only " +
                                                                std::to_string(class_names.size()) + " classes");
        if (ex.iq.size() != 2 * length)
            throw FormatError(FormatError::Kind::inconsistent, "example " + std::to_string(i) + " has " +
                                                                   std::to_string(ex.iq.size()) +
                                                                   " samples, expected 2 x " + std::to_string(length));
        for (float v : ex.iq)
            if (!std::isfinite(v))
                throw FormatError(FormatError::Kind::inconsistent,
                                  "example " + std::to_string(i) + " contains a non-finite sample");
    }
}

Dataset generate_dataset(const GeneratorConfig& config) {
    if (config.formats.empty()) throw ConfigError("generate_dataset: empty format list");
    if (config.snr_db.empty()) throw ConfigError("generate_dataset: empty SNR list");
    if (config.per_class_per_snr < 1) throw ConfigError("generate_dataset: per_class_per_snr must be >= 1");
    if (config.max_cfo < 0 || config.max_cfo > 0.01)
        throw ConfigError("generate_dataset: max_cfo must lie in [0, 0.01]");
    if (config.max_sro_ppm < 0 || config.max_sro_ppm > 500)
        throw ConfigError("generate_dataset: max_sro_ppm must lie in [0, 500]");

    std::vector<ModulationFormat> formats = config.formats;
    std::sort(formats.begin(), formats.end());
    formats.erase(std::unique(formats.begin(), formats.end()), formats.end());

    Dataset ds;
    ds.length = config.length;
    for (auto f : formats) ds.class_names.emplace_back(format_name(f));

    const std::size_t per_cell = config.per_class_per_snr;
    const std::size_t per_format = config.snr_db.size() * per_cell;
    const std::size_t total = formats.size() * per_format;
    ds.examples.resize(total);

    auto produce = [&](std::size_t index) {
        const std::size_t fi = index / per_format;
        const std::size_t si = (index % per_format) / per_cell;
        const std::size_t k = index % per_cell;
        const auto format = formats[fi];
        const int snr = config.snr_db[si];
        std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(format),
                                     static_cast<std::uint64_t>(static_cast<std::int64_t>(snr)), k));
        const auto clean = modulate(format, config.length, rng);
        std::uniform_real_distribution<double> cfo(-config.max_cfo, config.max_cfo);
        std::uniform_real_distribution<double> sro(-config.max_sro_ppm, config.max_sro_ppm);
        ChannelParams ch;
        ch.snr_db = snr;
        ch.cfo_norm = config.max_cfo > 0 ? cfo(rng) : 0.0;
        ch.sro_ppm = config.max_sro_ppm > 0 ? sro(rng) : 0.0;
        ch.rng_seed = rng();
        ds.examples[index] = to_example(apply_channel(clean, ch), static_cast<std::uint16_t>(fi),
                                        static_cast<std::int16_t>(snr));
    };

    const unsigned workers = std::max(1u, config.threads ? config.threads : thread_count_from_env());
    if (workers == 1) {
        for (std::size_t i = 0; i < total; ++i) produce(i);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < total; i += workers) produce(i);
            });
        for (auto& t : pool) t.join();
    }
    return ds;
}

Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices) {
    Dataset out;
    out.class_names = dataset.class_names;
    out.length = dataset.length;
    out.examples.reserve(indices.size());
    for (std::size_t i : indices) out.examples.push_back(dataset.examples.at(i));
    return out;
}

DatasetSplit split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed) {
    if (ratios.train < 0 || ratios.val < 0 || ratios.test < 0 ||
        std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
        throw ConfigError("split ratios must be nonnegative and sum to 1");

    std::map<std::pair<int, int>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < dataset.examples.size(); ++i)
        cells[{dataset.examples[i].label, dataset.examples[i].snr_db}].push_back(i);

    DatasetSplit split;
    for (auto& [key, members] : cells) {
        const std::size_t n = members.size();
        if (n < 5) {
            split.warnings.push_back("cell (label " + std::to_string(key.first) + ", snr " + std::to_string(key.second) +
                                     ") has only " + std::to_string(n) + " examples; all assigned to train");
            split.train_indices.insert(split.train_indices.end(), members.begin(), members.end());
            continue;
        }
        std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(key.first),
                                     static_cast<std::uint64_t>(static_cast<std::int64_t>(key.second))));
        // Fisher-Yates with our own index draw so the result is stdlib-independent.
        for (std::size_t i = n - 1; i > 0; --i) std::swap(members[i], members[rng() % (i + 1)]);
        const auto n_val = static_cast<std::size_t>(std::floor(ratios.val * n + 1e-9));
        const auto n_test = static_cast<std::size_t>(std::floor(ratios.test * n + 1e-9));
        split.val_indices.insert(split.val_indices.end(), members.begin(), members.begin() + n_val);
        split.test_indices.insert(split.test_indices.end(), members.begin() + n_val, members.begin() + n_val + n_test);
        split.train_indices.insert(split.train_indices.end(), members.begin() + n_val + n_test, members.end());
    }
    for (auto* idx : {&split.train_indices, &split.val_indices, &split.test_indices}) std::sort(idx->begin(), idx->end());
    split.train = subset(dataset, split.train_indices);
    split.val = subset(dataset, split.val_indices);
    split.test = subset(dataset, split.test_indices);
    return split;
}

}  // namespace amc
