// ops.hpp - differentiable operations on BasicTensor
//
// Every op validates shapes up front (DimensionError naming the offending
// shapes), computes its result, and records a backward rule when needed.
// There is no implicit broadcasting; bias vectors are the only operands that
// are expanded.

#pragma once

#include <span>
#include <vector>

#include "amc/tensor.hpp"

namespace amc {

// [m x k] * [k x n] -> [m x n]
template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b);

// Affine map on rows: x [B x in], weight [out x in], bias [out] -> [B x out].
template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias);

// Height-2 convolution across both I/Q rows. input [B x 1 x 2 x L],
// kernels [C x 1 x 2 x K] with K odd, bias [C] -> [B x C x 1 x L].
// Zero padding of (K-1)/2 on both ends keeps the length.
template <typename T>
BasicTensor<T> conv2d_iq(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                         const BasicTensor<T>& bias);

// Length-preserving 1-D convolution. input [B x Cin x L], kernels [Cout x Cin x 3],
// bias [Cout] -> [B x Cout x L].
template <typename T>
BasicTensor<T> conv1d_same(const BasicTensor<T>& input, const BasicTensor<T>& kernels,
                           const BasicTensor<T>& bias);

// Per-position channel mixing (1x1 convolution). x [B x C x L], weight [D x C],
// bias [D] -> [B x D x L].
template <typename T>
BasicTensor<T> channel_project(const BasicTensor<T>& x, const BasicTensor<T>& weight,
                               const BasicTensor<T>& bias);

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x);

// Softmax over the last axis.
template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b);

// Elementwise (Hadamard) product.
template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b);

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor);

// Sum of all elements -> shape [1].
template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x);

// Concatenation along axis 1; all other axes must agree.
template <typename T>
BasicTensor<T> concat_channels(const std::vector<BasicTensor<T>>& parts);

// Mean over the last axis: [..., L] -> [...].
template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x);

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, const Shape& shape);

// x [B x R x L] -> row r as [B x L].
template <typename T>
BasicTensor<T> select_row(const BasicTensor<T>& x, std::size_t row);

// R tensors of [B x L] -> [B x R x L].
template <typename T>
BasicTensor<T> stack_rows(const std::vector<BasicTensor<T>>& rows);

enum class BatchNormMode { train, eval };

template <typename T>
struct RunningMoments {
    std::vector<T> mean;
    std::vector<T> var;

    explicit RunningMoments(std::size_t channels = 0) : mean(channels, T(0)), var(channels, T(1)) {}
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

// Per-channel normalization over every axis except 1. input [B x C x ...].
// Train mode needs B >= 2 and updates `moments`; eval mode reads them.
template <typename T>
BasicTensor<T> batchnorm(const BasicTensor<T>& input, const BasicTensor<T>& gamma,
                         const BasicTensor<T>& beta, RunningMoments<T>& moments, BatchNormMode mode);

// Mean negative log-likelihood of `labels` under softmax(logits), logits [B x K].
template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels);

// Scaled dot-product attention over the length axis.
// q, k, v: [dh x L] or [N x dh x L]. Position i of the output is
// sum_j softmax_j(q_i . k_j / sqrt(dh)) v_j.
template <typename T>
BasicTensor<T> attention(const BasicTensor<T>& q, const BasicTensor<T>& k, const BasicTensor<T>& v);

// Attention weight matrix [L x L] (or [N x L x L]); row i holds the weights of query i.
// Not differentiable.
template <typename T>
BasicTensor<T> attention_weights(const BasicTensor<T>& q, const BasicTensor<T>& k);

}  // namespace amc
