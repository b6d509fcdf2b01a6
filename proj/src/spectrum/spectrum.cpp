#include <vector>

#include "amc/ops.hpp"
#include "amc/spectrum.hpp"

namespace amc {

namespace {

// Applies the (optionally inverse) transform to each row pair of a stacked
// [B x 2 x L] buffer, scaling the result by `factor`.
template <typename T>
std::vector<T> transform_rows(std::span<const T> in, std::size_t batch, std::size_t len, bool inverse, double factor) {
    std::vector<T> out(in.size());
    std::vector<std::complex<double>> work(len);
    for (std::size_t b = 0; b < batch; ++b) {
        const T* re = in.data() + b * 2 * len;
        const T* im = re + len;
        for (std::size_t k = 0; k < len; ++k) work[k] = {static_cast<double>(re[k]), static_cast<double>(im[k])};
        fft_inplace(work, inverse);
        T* ore = out.data() + b * 2 * len;
        T* oim = ore + len;
        for (std::size_t k = 0; k < len; ++k) {
            ore[k] = static_cast<T>(work[k].real() * factor);
            oim[k] = static_cast<T>(work[k].imag() * factor);
        }
    }
    return out;
}

template <typename T>
void check_stacked(const char* op, const BasicTensor<T>& x) {
    if (x.rank() != 3 || x.dim(1) != 2)
        throw DimensionError(std::string(op) + ": expected [B x 2 x L], got " + shape_str(x.shape()));
}

}  // namespace

// The DFT is a real-linear map whose transpose is the unnormalized inverse
// transform, so backward of dft is L * idft and backward of idft is dft / L.
template <typename T>
BasicTensor<T> dft_stacked(const BasicTensor<T>& x) {
    check_stacked("dft", x);
    const std::size_t batch = x.dim(0), len = x.dim(2);
    auto out = transform_rows<T>(x.values(), batch, len, false, 1.0);
    auto sx = x.storage();
    return detail::make_result<T>("dft", x.shape(), std::move(out), {&x}, [sx, batch, len](std::span<const T> g) {
        auto back = transform_rows<T>(g, batch, len, true, 1.0);
        for (std::size_t i = 0; i < back.size(); ++i) sx->grad[i] += back[i];
    });
}

template <typename T>
BasicTensor<T> idft_stacked(const BasicTensor<T>& spectrum) {
    check_stacked("idft", spectrum);
    const std::size_t batch = spectrum.dim(0), len = spectrum.dim(2);
    const double inv_len = 1.0 / static_cast<double>(len);
    auto out = transform_rows<T>(spectrum.values(), batch, len, true, inv_len);
    auto ss = spectrum.storage();
    return detail::make_result<T>("idft", spectrum.shape(), std::move(out), {&spectrum},
                                  [ss, batch, len, inv_len](std::span<const T> g) {
                                      auto back = transform_rows<T>(g, batch, len, false, inv_len);
                                      for (std::size_t i = 0; i < back.size(); ++i) ss->grad[i] += back[i];
                                  });
}

template <typename T>
SpectrumPair<T> dft(const BasicTensor<T>& x) {
    auto stacked = dft_stacked(x);
    return {select_row(stacked, 0), select_row(stacked, 1)};
}

template <typename T>
BasicTensor<T> idft(const SpectrumPair<T>& spectrum) {
    if (spectrum.real.shape() != spectrum.imag.shape())
        throw DimensionError("idft: real " + shape_str(spectrum.real.shape()) + " and imag " +
                             shape_str(spectrum.imag.shape()) + " differ");
    return idft_stacked(stack_rows<T>({spectrum.real, spectrum.imag}));
}

template SpectrumPair<float> dft(const BasicTensor<float>&);
template SpectrumPair<double> dft(const BasicTensor<double>&);
template BasicTensor<float> idft(const SpectrumPair<float>&);
template BasicTensor<double> idft(const SpectrumPair<double>&);
template BasicTensor<float> dft_stacked(const BasicTensor<float>&);
template BasicTensor<double> dft_stacked(const BasicTensor<double>&);
template BasicTensor<float> idft_stacked(const BasicTensor<float>&);
template BasicTensor<double> idft_stacked(const BasicTensor<double>&);

}  // namespace amc
