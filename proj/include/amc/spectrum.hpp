// spectrum.hpp - discrete Fourier transform over the real-valued 2 x L I/Q layout
//
// Convention: the forward transform is unnormalized,
//     X[i] = sum_k (x[0,k] + j x[1,k]) exp(-j 2 pi i k / L),
// and the inverse carries the 1/L factor,
//     x[i] = (1/L) sum_k X[k] exp(+j 2 pi i k / L).
// Both are differentiable. Power-of-two lengths use an iterative radix-2 FFT,
// other lengths fall back to the direct O(L^2) sum.

#pragma once

#include <complex>
#include <span>

#include "amc/tensor.hpp"

namespace amc {

// In-place unnormalized transform (sign -1 forward, +1 inverse).
void fft_inplace(std::span<std::complex<double>> data, bool inverse);

template <typename T>
struct SpectrumPair {
    BasicTensor<T> real;  // [B x L]
    BasicTensor<T> imag;  // [B x L]
};

// x [B x 2 x L] -> spectrum of each I + jQ row pair.
template <typename T>
SpectrumPair<T> dft(const BasicTensor<T>& x);

// Inverse of dft: row 0 of the result is the real part, row 1 the imaginary part.
template <typename T>
BasicTensor<T> idft(const SpectrumPair<T>& spectrum);

// Same transforms on the stacked [B x 2 x L] layout (row 0 real, row 1 imag).
template <typename T>
BasicTensor<T> dft_stacked(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> idft_stacked(const BasicTensor<T>& spectrum);

}  // namespace amc
