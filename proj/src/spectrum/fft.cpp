#include <cmath>
#include <numbers>
#include <vector>

#include "amc/spectrum.hpp"

namespace amc {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void direct_dft(std::span<std::complex<double>> data, bool inverse) {
    const std::size_t n = data.size();
    const double sign = inverse ? 1.0 : -1.0;
    std::vector<std::complex<double>> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::complex<double> acc = 0;
        for (std::size_t k = 0; k < n; ++k) {
            // (i*k) mod n keeps the angle small for long transforms
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>((i * k) % n) / n;
            acc += data[k] * std::complex<double>(std::cos(angle), std::sin(angle));
        }
        out[i] = acc;
    }
    std::copy(out.begin(), out.end(), data.begin());
}

void radix2(std::span<std::complex<double>> data, bool inverse) {
    const std::size_t n = data.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }
    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k) {
            const double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / len;
            const std::complex<double> w(std::cos(angle), std::sin(angle));
            for (std::size_t start = 0; start < n; start += len) {
                const auto u = data[start + k];
                const auto v = data[start + k + half] * w;
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
}

}  // namespace

void fft_inplace(std::span<std::complex<double>> data, bool inverse) {
    if (data.size() <= 1) return;
    if (is_power_of_two(data.size()))
        radix2(data, inverse);
    else
        direct_dft(data, inverse);
}

}  // namespace amc
