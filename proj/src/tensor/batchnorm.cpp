#include <cmath>

#include "amc/ops.hpp"

namespace amc {

template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, const BasicTensor<T>& gamma, const BasicTensor<T>& beta,
                         RunningMoments<T>& moments, BatchNormMode mode) {
    const Shape& s = input.shape();
    if (s.size() < 2) throw DimensionError("batchnorm: input needs rank >= 2, got " + shape_str(s));
    const std::size_t batch = s[0], channels = s[1];
    const std::size_t inner = input.numel() / (batch * channels);
    if (gamma.shape() != Shape{channels} || beta.shape() != Shape{channels})
        throw DimensionError("batchnorm: gamma " + shape_str(gamma.shape()) + " / beta " +
                             shape_str(beta.shape()) + " do not match input " + shape_str(s));
    if (moments.mean.size() != channels || moments.var.size() != channels)
        throw DimensionError("batchnorm: running moments sized for " + std::to_string(moments.mean.size()) +
                             " channels, input has " + std::to_string(channels));
    if (mode == BatchNormMode::train && batch < 2)
        throw DimensionError("batchnorm: train mode needs a batch of at least 2, got " + std::to_string(batch));

    const std::size_t count = batch * inner;
    const T eps = static_cast<T>(kBatchNormEps);
    const T momentum = static_cast<T>(kBatchNormMomentum);
    auto x = input.values();
    auto gv = gamma.values();
    auto bv = beta.values();

    std::vector<T> mean(channels), inv_std(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        if (mode == BatchNormMode::train) {
            T total = 0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) total += x[(b * channels + c) * inner + i];
            const T mu = total / T(count);
            T sq = 0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const T d = x[(b * channels + c) * inner + i] - mu;
                    sq += d * d;
                }
            const T var = sq / T(count);
            mean[c] = mu;
            inv_std[c] = T(1) / std::sqrt(var + eps);
            const T unbiased = sq / T(count - 1);
            moments.mean[c] = (T(1) - momentum) * moments.mean[c] + momentum * mu;
            moments.var[c] = (T(1) - momentum) * moments.var[c] + momentum * unbiased;
        } else {
            mean[c] = moments.mean[c];
            inv_std[c] = T(1) / std::sqrt(moments.var[c] + eps);
        }
    }

    std::vector<T> out(x.size());
    for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < channels; ++c)
            for (std::size_t i = 0; i < inner; ++i) {
                const std::size_t idx = (b * channels + c) * inner + i;
                out[idx] = gv[c] * (x[idx] - mean[c]) * inv_std[c] + bv[c];
            }

    auto sx = input.storage(), sg = gamma.storage(), sb = beta.storage();
    const bool train = mode == BatchNormMode::train;
    auto backward = [sx, sg, sb, mean, inv_std, batch, channels, inner, count, train](std::span<const T> g) {
        for (std::size_t c = 0; c < channels; ++c) {
            T sum_g = 0, sum_g_xhat = 0;
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const std::size_t idx = (b * channels + c) * inner + i;
                    const T xhat = (sx->values[idx] - mean[c]) * inv_std[c];
                    sum_g += g[idx];
                    sum_g_xhat += g[idx] * xhat;
                }
            if (sg->requires_grad) sg->grad[c] += sum_g_xhat;
            if (sb->requires_grad) sb->grad[c] += sum_g;
            if (!sx->requires_grad) continue;
            const T gamma_c = sg->values[c];
            for (std::size_t b = 0; b < batch; ++b)
                for (std::size_t i = 0; i < inner; ++i) {
                    const std::size_t idx = (b * channels + c) * inner + i;
                    if (train) {
                        const T xhat = (sx->values[idx] - mean[c]) * inv_std[c];
                        sx->grad[idx] += gamma_c * inv_std[c] / T(count) *
                                         (T(count) * g[idx] - sum_g - xhat * sum_g_xhat);
                    } else {
                        sx->grad[idx] += gamma_c * inv_std[c] * g[idx];
                    }
                }
        }
    };
    return detail::make_result<T>("batchnorm", s, std::move(out), {&input, &gamma, &beta}, std::move(backward));
}

template BasicTensor<float> batchnorm(const BasicTensor<float>&, const BasicTensor<float>&, const BasicTensor<float>&,
                                      RunningMoments<float>&, BatchNormMode);
template BasicTensor<double> batchnorm(const BasicTensor<double>&, const BasicTensor<double>&,
                                       const BasicTensor<double>&, RunningMoments<double>&, BatchNormMode);

}  // namespace amc
