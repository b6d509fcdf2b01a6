#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "amc/datagen.hpp"
#include "amc/errors.hpp"
#include "amc/spectrum.hpp"

namespace amc {

namespace {

constexpr std::array<std::string_view, kFormatCount> kNames = {
    "8PSK", "BPSK", "QAM16", "QAM64", "QPSK", "WBFM", "CPFSK", "GFSK", "AM-DSB", "AM-SSB", "PAM4"};

std::string normalize_name(std::string_view name) {
    std::string out;
    for (char ch : name)
        if (std::isalnum(static_cast<unsigned char>(ch))) out.push_back(static_cast<char>(std::toupper(ch)));
    return out;
}

std::vector<std::complex<double>> square_qam(int side) {
    std::vector<std::complex<double>> pts;
    for (int i = 0; i < side; ++i)
        for (int q = 0; q < side; ++q) pts.emplace_back(2 * i - side + 1, 2 * q - side + 1);
    return pts;
}

void normalize_energy(std::vector<std::complex<double>>& pts) {
    double e = 0;
    for (auto p : pts) e += std::norm(p);
    const double s = 1.0 / std::sqrt(e / pts.size());
    for (auto& p : pts) p *= s;
}

void normalize_power(ComplexSignal& s) {
    const double p = average_power(s);
    if (p <= 0) return;
    const double g = 1.0 / std::sqrt(p);
    for (auto& v : s) v *= g;
}

// Band-limited Gaussian message: white noise through a one-pole low-pass,
// scaled to unit peak.
std::vector<double> analog_source(std::size_t length, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    const std::size_t burn_in = 64;
    std::vector<double> out(length);
    double y = 0;
    for (std::size_t n = 0; n < burn_in + length; ++n) {
        y = kSourcePole * y + (1.0 - kSourcePole) * normal(rng);
        if (n >= burn_in) out[n - burn_in] = y;
    }
    const double peak = std::max(1e-12, std::abs(*std::max_element(out.begin(), out.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
    })));
    for (auto& v : out) v /= peak;
    return out;
}

ComplexSignal phase_modulate(std::span<const double> freq_cycles_per_sample) {
    ComplexSignal out(freq_cycles_per_sample.size());
    double phase = 0;
    for (std::size_t n = 0; n < out.size(); ++n) {
        out[n] = std::polar(1.0, phase);
        phase = std::fmod(phase + 2.0 * std::numbers::pi * freq_cycles_per_sample[n], 2.0 * std::numbers::pi);
    }
    return out;
}

// Binary NRZ frequency pulse train at kSamplesPerSymbol, optionally
// Gaussian-filtered; returns `length` samples of instantaneous frequency.
std::vector<double> fsk_frequency(std::size_t length, bool gaussian, std::mt19937_64& rng) {
    const std::size_t sps = kSamplesPerSymbol;
    const std::size_t guard = 4 * sps;
    const std::size_t total = length + 2 * guard + sps;
    std::bernoulli_distribution bit(0.5);
    std::vector<double> nrz(total);
    for (std::size_t n = 0; n < total; n += sps) {
        const double s = bit(rng) ? 1.0 : -1.0;
        for (std::size_t k = n; k < std::min(total, n + sps); ++k) nrz[k] = s;
    }
    if (gaussian) {
        // Gaussian pulse with bandwidth-time product BT, truncated at +-2 symbols, unit DC gain.
        const double sigma = std::sqrt(std::log(2.0)) / (2.0 * std::numbers::pi * kGfskBt) * sps;
        const int half = static_cast<int>(2 * sps);
        std::vector<double> taps;
        for (int t = -half; t <= half; ++t) taps.push_back(std::exp(-0.5 * t * t / (sigma * sigma)));
        double dc = 0;
        for (double v : taps) dc += v;
        for (auto& v : taps) v /= dc;
        std::vector<double> filtered(total, 0.0);
        for (std::size_t n = 0; n < total; ++n)
            for (int t = -half; t <= half; ++t) {
                const auto src = static_cast<std::ptrdiff_t>(n) + t;
                if (src >= 0 && src < static_cast<std::ptrdiff_t>(total)) filtered[n] += taps[t + half] * nrz[src];
            }
        nrz = std::move(filtered);
    }
    std::uniform_int_distribution<std::size_t> offset(0, sps - 1);
    const std::size_t start = guard + offset(rng);
    std::vector<double> freq(length);
    const double deviation = kFskModulationIndex / (2.0 * sps);  // cycles per sample
    for (std::size_t n = 0; n < length; ++n) freq[n] = deviation * nrz[start + n];
    return freq;
}

}  // namespace

const std::array<ModulationFormat, kFormatCount>& all_formats() {
    static const std::array<ModulationFormat, kFormatCount> formats = [] {
        std::array<ModulationFormat, kFormatCount> f{};
        for (std::size_t i = 0; i < kFormatCount; ++i) f[i] = static_cast<ModulationFormat>(i);
        return f;
    }();
    return formats;
}

std::string_view format_name(ModulationFormat format) {
    const auto code = static_cast<std::size_t>(format);
    if (code >= kFormatCount) throw ConfigError("unknown modulation code " + std::to_string(code));
    return kNames[code];
}

ModulationFormat parse_format(std::string_view name) {
    const std::string key = normalize_name(name);
    for (std::size_t i = 0; i < kFormatCount; ++i)
        if (normalize_name(kNames[i]) == key) return static_cast<ModulationFormat>(i);
    if (key == "PSK8") return ModulationFormat::psk8;
    if (key == "QAM4") return ModulationFormat::qpsk;
    std::string valid;
    for (auto n : kNames) valid += (valid.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("unknown modulation format '" + std::string(name) + "'; valid names: " + valid);
}

bool is_digital(ModulationFormat format) {
    switch (format) {
        case ModulationFormat::psk8:
        case ModulationFormat::bpsk:
        case ModulationFormat::qam16:
        case ModulationFormat::qam64:
        case ModulationFormat::qpsk:
        case ModulationFormat::pam4:
            return true;
        default:
            return false;
    }
}

std::vector<std::complex<double>> constellation(ModulationFormat format) {
    std::vector<std::complex<double>> pts;
    switch (format) {
        case ModulationFormat::bpsk:
            pts = {{1, 0}, {-1, 0}};
            break;
        case ModulationFormat::qpsk:
            pts = {{1, 1}, {-1, 1}, {-1, -1}, {1, -1}};
            break;
        case ModulationFormat::psk8:
            for (int k = 0; k < 8; ++k) pts.push_back(std::polar(1.0, k * std::numbers::pi / 4));
            break;
        case ModulationFormat::qam16:
            pts = square_qam(4);
            break;
        case ModulationFormat::qam64:
            pts = square_qam(8);
            break;
        case ModulationFormat::pam4:
            pts = {{-3, 0}, {-1, 0}, {1, 0}, {3, 0}};
            break;
        default:
            throw ConfigError("format " + std::string(format_name(format)) + " has no constellation");
    }
    normalize_energy(pts);
    return pts;
}

ComplexSignal random_symbols(ModulationFormat format, std::size_t count, std::mt19937_64& rng) {
    const auto pts = constellation(format);
    std::uniform_int_distribution<std::size_t> pick(0, pts.size() - 1);
    ComplexSignal out(count);
    for (auto& s : out) s = pts[pick(rng)];
    return out;
}

std::vector<double> rrc_taps(std::size_t sps, double beta, std::size_t span) {
    const std::size_t n = span * sps + 1;
    const double center = static_cast<double>(span * sps) / 2.0;
    std::vector<double> taps(n);
    const double pi = std::numbers::pi;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = (static_cast<double>(i) - center) / static_cast<double>(sps);
        double h;
        if (std::abs(t) < 1e-12) {
            h = 1.0 - beta + 4.0 * beta / pi;
        } else if (beta > 0 && std::abs(std::abs(t) - 1.0 / (4.0 * beta)) < 1e-9) {
            h = beta / std::sqrt(2.0) *
                ((1 + 2 / pi) * std::sin(pi / (4 * beta)) + (1 - 2 / pi) * std::cos(pi / (4 * beta)));
        } else {
            h = (std::sin(pi * t * (1 - beta)) + 4 * beta * t * std::cos(pi * t * (1 + beta))) /
                (pi * t * (1 - (4 * beta * t) * (4 * beta * t)));
        }
        taps[i] = h;
    }
    double energy = 0;
    for (double h : taps) energy += h * h;
    const double g = std::sqrt(static_cast<double>(sps) / energy);
    for (auto& h : taps) h *= g;
    return taps;
}

ComplexSignal pulse_shape(std::span<const std::complex<double>> symbols) {
    static const std::vector<double> taps = rrc_taps(kSamplesPerSymbol, kRrcRolloff, kRrcSpanSymbols);
    const std::size_t sps = kSamplesPerSymbol;
    ComplexSignal out(symbols.size() * sps + taps.size() - 1);
    for (std::size_t s = 0; s < symbols.size(); ++s)
        for (std::size_t k = 0; k < taps.size(); ++k) out[s * sps + k] += symbols[s] * taps[k];
    return out;
}

double average_power(std::span<const std::complex<double>> signal) {
    if (signal.empty()) return 0.0;
    double p = 0;
    for (auto v : signal) p += std::norm(v);
    return p / static_cast<double>(signal.size());
}

ComplexSignal modulate(ModulationFormat format, std::size_t length, std::mt19937_64& rng) {
    if (length < 32) throw ConfigError("modulate: capture length must be at least 32, got " + std::to_string(length));
    ComplexSignal out;
    if (is_digital(format)) {
        const std::size_t sps = kSamplesPerSymbol;
        const std::size_t count = length / sps + 2 * kRrcSpanSymbols + 2;
        const auto shaped = pulse_shape(random_symbols(format, count, rng));
        // skip the filter ramp-up, then a random sub-symbol timing offset
        std::uniform_int_distribution<std::size_t> offset(0, sps - 1);
        const std::size_t start = kRrcSpanSymbols * sps + offset(rng);
        out.assign(shaped.begin() + static_cast<std::ptrdiff_t>(start),
                   shaped.begin() + static_cast<std::ptrdiff_t>(start + length));
    } else {
        switch (format) {
            case ModulationFormat::cpfsk:
                out = phase_modulate(fsk_frequency(length, false, rng));
                break;
            case ModulationFormat::gfsk:
                out = phase_modulate(fsk_frequency(length, true, rng));
                break;
            case ModulationFormat::wbfm: {
                auto freq = analog_source(length, rng);
                for (auto& f : freq) f *= kWbfmDeviationHz / kWbfmSampleRateHz;
                out = phase_modulate(freq);
                break;
            }
            case ModulationFormat::am_dsb: {
                const auto m = analog_source(length, rng);
                out.resize(length);
                for (std::size_t n = 0; n < length; ++n) out[n] = 1.0 + kAmModulationDepth * m[n];
                break;
            }
            case ModulationFormat::am_ssb: {
                // upper sideband: analytic signal of the message
                const auto m = analog_source(length, rng);
                out.assign(m.begin(), m.end());
                fft_inplace(out, false);
                const std::size_t n = length;
                for (std::size_t k = 1; k < n; ++k) {
                    if (2 * k < n)
                        out[k] *= 2.0;
                    else if (2 * k > n)
                        out[k] = 0.0;
                }
                fft_inplace(out, true);
                for (auto& v : out) v /= static_cast<double>(n);
                break;
            }
            default:
                throw ConfigError("modulate: unsupported format " + std::string(format_name(format)));
        }
    }
    normalize_power(out);
    return out;
}

SignalExample to_example(std::span<const std::complex<double>> signal, std::uint16_t label, std::int16_t snr_db) {
    SignalExample ex;
    ex.label = label;
    ex.snr_db = snr_db;
    const std::size_t len = signal.size();
    ex.iq.resize(2 * len);
    for (std::size_t n = 0; n < len; ++n) {
        ex.iq[n] = static_cast<float>(signal[n].real());
        ex.iq[len + n] = static_cast<float>(signal[n].imag());
    }
    return ex;
}

}  // namespace amc
