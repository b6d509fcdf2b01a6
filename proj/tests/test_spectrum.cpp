#include <doctest.h>

#include "amc/spectrum.hpp"
#include "oracles.hpp"

using namespace amc;

namespace {

template <typename T>
std::vector<std::complex<double>> row_signal(const BasicTensor<T>& x, std::size_t b) {
    const std::size_t len = x.dim(2);
    std::vector<std::complex<double>> s(len);
    for (std::size_t k = 0; k < len; ++k)
        s[k] = {double(x.values()[(b * 2) * len + k]), double(x.values()[(b * 2 + 1) * len + k])};
    return s;
}

template <typename T>
double spectrum_error(const SpectrumPair<T>& spec, std::size_t b, const std::vector<std::complex<double>>& ref) {
    double m = 0;
    const std::size_t len = ref.size();
    for (std::size_t i = 0; i < len; ++i) {
        m = std::max(m, std::abs(double(spec.real.values()[b * len + i]) - ref[i].real()));
        m = std::max(m, std::abs(double(spec.imag.values()[b * len + i]) - ref[i].imag()));
    }
    return m;
}

}  // namespace

TEST_CASE("dft trivial cases") {
    auto zero = dft(Tensor::zeros({1, 2, 8}));
    for (float v : zero.real.values()) CHECK(v == 0.0f);
    for (float v : zero.imag.values()) CHECK(v == 0.0f);

    auto impulse = Tensor::zeros({1, 2, 8});
    impulse.values()[0] = 1.0f;
    auto flat = dft(impulse);
    for (float v : flat.real.values()) CHECK(v == doctest::Approx(1.0));
    for (float v : flat.imag.values()) CHECK(std::abs(v) < 1e-7);
}

TEST_CASE("idft trivial cases") {
    auto zero = idft(SpectrumPair<float>{Tensor::zeros({1, 4}), Tensor::zeros({1, 4})});
    for (float v : zero.values()) CHECK(v == 0.0f);

    auto x = idft(SpectrumPair<float>{Tensor::full({1, 4}, 1.0f), Tensor::zeros({1, 4})});
    const std::vector<float> expected{1, 0, 0, 0, 0, 0, 0, 0};
    CHECK(oracle::max_abs_diff(x.values(), expected) < 1e-7);
}

TEST_CASE("dft matches the direct sum in both precisions") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 5; ++trial) {
        auto x32 = oracle::random_tensor<float>({2, 2, 128}, rng);
        auto x64 = x32.cast<double>();
        auto s32 = dft(x32);
        auto s64 = dft(x64);
        for (std::size_t b = 0; b < 2; ++b) {
            const auto ref = oracle::dft(row_signal(x64, b), -1);
            CHECK(spectrum_error(s32, b, ref) < 1e-3);
            CHECK(spectrum_error(s64, b, ref) < 1e-9);
        }
    }
}

TEST_CASE("non power-of-two lengths use the direct sum") {
    std::mt19937_64 rng(12);
    auto x = oracle::random_tensor<double>({1, 2, 12}, rng);
    CHECK(spectrum_error(dft(x), 0, oracle::dft(row_signal(x, 0), -1)) < 1e-12);
    auto back = idft(dft(x));
    CHECK(oracle::max_abs_diff(back.values(), x.values()) < 1e-12);
}

TEST_CASE("round trip, linearity and Parseval") {
    std::mt19937_64 rng(13);
    auto x = oracle::random_tensor<float>({3, 2, 128}, rng);
    CHECK(oracle::max_abs_diff(idft(dft(x)).values(), x.values()) < 1e-3);

    auto y = oracle::random_tensor<float>({3, 2, 128}, rng);
    auto lhs = dft(add(scale(x, 2.0f), scale(y, -0.5f)));
    auto sx = dft(x), sy = dft(y);
    auto rhs_re = add(scale(sx.real, 2.0f), scale(sy.real, -0.5f));
    auto rhs_im = add(scale(sx.imag, 2.0f), scale(sy.imag, -0.5f));
    CHECK(oracle::max_abs_diff(lhs.real.values(), rhs_re.values()) < 1e-4);
    CHECK(oracle::max_abs_diff(lhs.imag.values(), rhs_im.values()) < 1e-4);

    for (std::size_t b = 0; b < 3; ++b) {
        double time = 0, freq = 0;
        for (std::size_t k = 0; k < 256; ++k) time += double(x.values()[b * 256 + k]) * x.values()[b * 256 + k];
        for (std::size_t i = 0; i < 128; ++i) {
            const double re = sx.real.values()[b * 128 + i], im = sx.imag.values()[b * 128 + i];
            freq += re * re + im * im;
        }
        CHECK(std::abs(time - freq / 128) / time < 1e-4);
    }
}

TEST_CASE("stacked layout matches the pair layout") {
    std::mt19937_64 rng(14);
    auto x = oracle::random_tensor<double>({2, 2, 16}, rng);
    auto pair = dft(x);
    auto stacked = dft_stacked(x);
    for (std::size_t b = 0; b < 2; ++b)
        for (std::size_t i = 0; i < 16; ++i) {
            CHECK(stacked.values()[(b * 2) * 16 + i] == pair.real.values()[b * 16 + i]);
            CHECK(stacked.values()[(b * 2 + 1) * 16 + i] == pair.imag.values()[b * 16 + i]);
        }
    CHECK(oracle::max_abs_diff(idft_stacked(stacked).values(), x.values()) < 1e-12);
}

TEST_CASE("dft and idft gradients") {
    std::mt19937_64 rng(15);
    auto x = oracle::random_tensor<double>({2, 2, 8}, rng, true);
    auto r1 = oracle::check_gradients(
        [&] {
            auto s = dft(x);
            return add(oracle::probe(s.real, 1), oracle::probe(s.imag, 2));
        },
        {x});
    CHECK_MESSAGE(r1.max_rel_error < 1e-3, r1.worst);

    auto re = oracle::random_tensor<double>({2, 6}, rng, true);
    auto im = oracle::random_tensor<double>({2, 6}, rng, true);
    auto r2 = oracle::check_gradients([&] { return oracle::probe(idft(SpectrumPair<double>{re, im}), 3); }, {re, im});
    CHECK_MESSAGE(r2.max_rel_error < 1e-3, r2.worst);
}

TEST_CASE("shape checks") {
    CHECK_THROWS_AS(dft(Tensor::zeros({1, 3, 8})), DimensionError);
    CHECK_THROWS_AS(idft(SpectrumPair<float>{Tensor::zeros({1, 4}), Tensor::zeros({1, 5})}), DimensionError);
}
