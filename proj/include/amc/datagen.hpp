// datagen.hpp - synthetic modulated I/Q captures, channel impairments and the
// AMCD dataset container.
//
// Signals are handled as complex baseband (I + jQ) in double precision while
// being synthesized; SignalExample stores the final capture as 32-bit floats,
// I row then Q row.

#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace amc {

using ComplexSignal = std::vector<std::complex<double>>;

// Stable codes 0..10.
enum class ModulationFormat : std::uint8_t {
    psk8 = 0,
    bpsk,
    qam16,
    qam64,
    qpsk,
    wbfm,
    cpfsk,
    gfsk,
    am_dsb,
    am_ssb,
    pam4,
};

inline constexpr std::size_t kFormatCount = 11;

const std::array<ModulationFormat, kFormatCount>& all_formats();
std::string_view format_name(ModulationFormat format);
// Case-insensitive; also accepts "PSK8", "AMDSB", "AM_SSB" style aliases.
// Throws ConfigError listing the valid names.
ModulationFormat parse_format(std::string_view name);
bool is_digital(ModulationFormat format);

// Waveform conventions.
inline constexpr std::size_t kSamplesPerSymbol = 8;
inline constexpr double kRrcRolloff = 0.35;
inline constexpr std::size_t kRrcSpanSymbols = 8;
inline constexpr double kGfskBt = 0.5;
inline constexpr double kFskModulationIndex = 0.5;
inline constexpr double kWbfmDeviationHz = 75e3;
inline constexpr double kWbfmSampleRateHz = 200e3;
inline constexpr double kAmModulationDepth = 0.5;
inline constexpr double kSourcePole = 0.9;

// Unit-average-energy constellation of a digital format.
std::vector<std::complex<double>> constellation(ModulationFormat format);

// `count` uniformly drawn constellation points (digital formats only).
ComplexSignal random_symbols(ModulationFormat format, std::size_t count, std::mt19937_64& rng);

// Root-raised-cosine taps normalized so that sum(h^2) = samples_per_symbol,
// which makes a unit-energy symbol stream come out at unit average power.
std::vector<double> rrc_taps(std::size_t samples_per_symbol, double rolloff, std::size_t span_symbols);

// Zero-insertion upsampling by kSamplesPerSymbol followed by RRC filtering (full convolution).
ComplexSignal pulse_shape(std::span<const std::complex<double>> symbols);

// One clean baseband capture of `length` samples, normalized to unit average power.
ComplexSignal modulate(ModulationFormat format, std::size_t length, std::mt19937_64& rng);

double average_power(std::span<const std::complex<double>> signal);

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

struct ChannelParams {
    double snr_db = kNoNoise;  // +inf disables noise
    double cfo_norm = 0.0;     // cycles per sample, within [-0.01, 0.01]
    double sro_ppm = 0.0;      // within [-500, 500]
    std::uint64_t rng_seed = 0;
};

// CFO rotation, then SRO resampling (linear interpolation), then complex AWGN
// scaled to the measured power of the impaired signal.
ComplexSignal apply_channel(std::span<const std::complex<double>> signal, const ChannelParams& params);

struct SignalExample {
    std::vector<float> iq;  // 2 x L, row-major
    std::uint16_t label = 0;
    std::int16_t snr_db = 0;

    std::size_t length() const { return iq.size() / 2; }
    bool operator==(const SignalExample&) const = default;
};

SignalExample to_example(std::span<const std::complex<double>> signal, std::uint16_t label, std::int16_t snr_db);

struct Dataset {
    std::vector<std::string> class_names;
    std::size_t length = 128;
    std::vector<SignalExample> examples;

    std::size_t size() const { return examples.size(); }
    // Example counts keyed by (label, snr_db).
    std::map<std::pair<int, int>, std::size_t> cell_counts() const;
    std::size_t count(int label, int snr_db) const;
    // Distinct SNR tags, ascending.
    std::vector<int> snr_values() const;
    // Throws FormatError(bad_label / inconsistent) on violated invariants.
    void validate() const;

    bool operator==(const Dataset&) const = default;
};

struct GeneratorConfig {
    std::vector<ModulationFormat> formats;
    std::vector<int> snr_db;
    std::size_t per_class_per_snr = 1000;
    std::uint64_t seed = 0;
    std::size_t length = 128;
    // Per-example impairments are drawn uniformly from [-max, max].
    double max_cfo = 0.002;
    double max_sro_ppm = 100.0;
    // 0 means: AMCNET_THREADS if set, else 1.
    unsigned threads = 0;
};

// The SNR grid -20, -18, ..., 18 dB.
std::vector<int> default_snr_grid();

// Class table = requested formats in canonical order; examples ordered by
// (format, snr, index). Each example is seeded from (seed, format, snr, index),
// so the result does not depend on thread count.
Dataset generate_dataset(const GeneratorConfig& config);

// Worker count from AMCNET_THREADS (>= 1), defaulting to 1.
unsigned thread_count_from_env();

// AMCD binary format.
inline constexpr std::uint32_t kDatasetVersion = 1;
std::string encode_dataset(const Dataset& dataset);
Dataset decode_dataset(std::string_view bytes);
void write_dataset(const Dataset& dataset, const std::string& path);
Dataset read_dataset(const std::string& path);

struct SplitRatios {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;
};

struct DatasetSplit {
    Dataset train, val, test;
    std::vector<std::size_t> train_indices, val_indices, test_indices;  // into the source, ascending
    std::vector<std::string> warnings;
};

// Stratified per (label, snr) cell: floor(val * n) and floor(test * n) examples
// go to validation and test, the remainder to training. Cells smaller than 5
// go entirely to training (with a warning).
DatasetSplit split_dataset(const Dataset& dataset, const SplitRatios& ratios, std::uint64_t seed);

// Subset of `dataset` at the given indices (in that order).
Dataset subset(const Dataset& dataset, std::span<const std::size_t> indices);

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace amc
