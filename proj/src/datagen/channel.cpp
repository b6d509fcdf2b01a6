#include <algorithm>
#include <cmath>
#include <numbers>

#include "amc/datagen.hpp"
#include "amc/errors.hpp"

namespace amc {

ComplexSignal apply_channel(std::span<const std::complex<double>> signal, const ChannelParams& params) {
    if (!(std::abs(params.cfo_norm) <= 0.01))
        throw ConfigError("channel: cfo_norm must lie in [-0.01, 0.01], got " + std::to_string(params.cfo_norm));
    if (!(std::abs(params.sro_ppm) <= 500.0))
        throw ConfigError("channel: sro_ppm must lie in [-500, 500], got " + std::to_string(params.sro_ppm));
    if (std::isnan(params.snr_db) || params.snr_db == -std::numeric_limits<double>::infinity())
        throw ConfigError("channel: snr_db must be a number or +inf");

    ComplexSignal out(signal.begin(), signal.end());

    if (params.cfo_norm != 0.0)
        for (std::size_t n = 0; n < out.size(); ++n)
            out[n] *= std::polar(1.0, 2.0 * std::numbers::pi * params.cfo_norm * static_cast<double>(n));

    if (params.sro_ppm != 0.0 && out.size() > 1) {
        // receiver clock runs at (1 + ppm) of the transmitter's: sample n sits at t = n (1 + ppm)
        const double ratio = 1.0 + params.sro_ppm * 1e-6;
        const ComplexSignal src = out;
        const double last = static_cast<double>(src.size() - 1);
        for (std::size_t n = 0; n < out.size(); ++n) {
            const double t = std::clamp(static_cast<double>(n) * ratio, 0.0, last);
            const auto i = static_cast<std::size_t>(std::floor(t));
            const double frac = t - static_cast<double>(i);
            out[n] = i + 1 < src.size() ? src[i] * (1.0 - frac) + src[i + 1] * frac : src[i];
        }
    }

    if (std::isfinite(params.snr_db)) {
        const double noise_power = average_power(out) * std::pow(10.0, -params.snr_db / 10.0);
        std::mt19937_64 rng(params.rng_seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(noise_power / 2.0));
        for (auto& v : out) {
            const double ni = normal(rng);
            const double nq = normal(rng);
            v += std::complex<double>(ni, nq);
        }
    }
    return out;
}

}  // namespace amc
