#include <algorithm>
#include <cmath>

#include "amc/ops.hpp"
#include "eigen_util.hpp"

namespace amc {

using detail::as_mat;
using detail::make_result;

namespace {

struct AttentionGeometry {
    std::size_t slices, dh, len;
};

template <typename T>
AttentionGeometry attention_geometry(const BasicTensor<T>& q, const BasicTensor<T>& k, const BasicTensor<T>* v) {
    const Shape& qs = q.shape();
    bool ok = (qs.size() == 2 || qs.size() == 3) && k.shape() == qs && (!v || v->shape() == qs);
    if (!ok)
        throw DimensionError("attention: q " + shape_str(qs) + ", k " + shape_str(k.shape()) +
                             (v ? ", v " + shape_str(v->shape()) : std::string()) +
                             " must share one shape of rank 2 or 3");
    if (qs.size() == 2) return {1, qs[0], qs[1]};
    return {qs[0], qs[1], qs[2]};
}

// weights[i, j] = softmax_j(q_i . k_j * scale) for one slice.
template <typename T>
void slice_weights(const T* q, const T* k, T* weights, std::size_t dh, std::size_t len) {
    const T factor = T(1) / std::sqrt(static_cast<T>(dh));
    auto w = as_mat(weights, len, len);
    w.noalias() = as_mat(q, dh, len).transpose() * as_mat(k, dh, len);
    w *= factor;
    // plain loops: vectorized reductions would round differently with buffer alignment
    for (std::size_t i = 0; i < len; ++i) {
        T* row = weights + i * len;
        T mx = row[0];
        for (std::size_t j = 1; j < len; ++j) mx = std::max(mx, row[j]);
        T total = 0;
        for (std::size_t j = 0; j < len; ++j) total += row[j] = std::exp(row[j] - mx);
        for (std::size_t j = 0; j < len; ++j) row[j] /= total;
    }
}

}  // namespace

template <typename T>
BasicTensor<T> attention_weights(const BasicTensor<T>& q, const BasicTensor<T>& k) {
    const auto geo = attention_geometry<T>(q, k, nullptr);
    std::vector<T> weights(geo.slices * geo.len * geo.len);
    const std::size_t stride = geo.dh * geo.len;
    for (std::size_t n = 0; n < geo.slices; ++n)
        slice_weights(q.values().data() + n * stride, k.values().data() + n * stride,
                      weights.data() + n * geo.len * geo.len, geo.dh, geo.len);
    Shape shape = q.rank() == 2 ? Shape{geo.len, geo.len} : Shape{geo.slices, geo.len, geo.len};
    return BasicTensor<T>::from(shape, std::move(weights));
}

template <typename T>
BasicTensor<T> attention(const BasicTensor<T>& q, const BasicTensor<T>& k, const BasicTensor<T>& v) {
    const auto geo = attention_geometry(q, k, &v);
    const std::size_t stride = geo.dh * geo.len;
    const std::size_t wstride = geo.len * geo.len;
    std::vector<T> weights(geo.slices * wstride);
    std::vector<T> out(geo.slices * stride);
    for (std::size_t n = 0; n < geo.slices; ++n) {
        T* w = weights.data() + n * wstride;
        slice_weights(q.values().data() + n * stride, k.values().data() + n * stride, w, geo.dh, geo.len);
        // out[:, i] = sum_j w[i, j] v[:, j]
        as_mat(out.data() + n * stride, geo.dh, geo.len).noalias() =
            as_mat(v.values().data() + n * stride, geo.dh, geo.len) * as_mat(w, geo.len, geo.len).transpose();
    }
    auto sq = q.storage(), sk = k.storage(), sv = v.storage();
    auto backward = [sq, sk, sv, geo, stride, wstride, weights = std::move(weights)](std::span<const T> g) {
        const T factor = T(1) / std::sqrt(static_cast<T>(geo.dh));
        detail::RowMat<T> dw(geo.len, geo.len);
        for (std::size_t n = 0; n < geo.slices; ++n) {
            const auto gm = as_mat(g.data() + n * stride, geo.dh, geo.len);
            const auto w = as_mat(weights.data() + n * wstride, geo.len, geo.len);
            const auto vm = as_mat(sv->values.data() + n * stride, geo.dh, geo.len);
            if (sv->requires_grad) as_mat(sv->grad.data() + n * stride, geo.dh, geo.len).noalias() += gm * w;
            if (!sq->requires_grad && !sk->requires_grad) continue;
            dw.noalias() = gm.transpose() * vm;
            // softmax backward, then the 1/sqrt(dh) scale
            for (Eigen::Index i = 0; i < dw.rows(); ++i) {
                T dot = 0;
                for (Eigen::Index j = 0; j < dw.cols(); ++j) dot += dw(i, j) * w(i, j);
                for (Eigen::Index j = 0; j < dw.cols(); ++j) dw(i, j) = w(i, j) * (dw(i, j) - dot) * factor;
            }
            if (sq->requires_grad)
                as_mat(sq->grad.data() + n * stride, geo.dh, geo.len).noalias() +=
                    as_mat(sk->values.data() + n * stride, geo.dh, geo.len) * dw.transpose();
            if (sk->requires_grad)
                as_mat(sk->grad.data() + n * stride, geo.dh, geo.len).noalias() +=
                    as_mat(sq->values.data() + n * stride, geo.dh, geo.len) * dw;
        }
    };
    return make_result<T>("attention", q.shape(), std::move(out), {&q, &k, &v}, std::move(backward));
}

template BasicTensor<float> attention(const BasicTensor<float>&, const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> attention(const BasicTensor<double>&, const BasicTensor<double>&,
                                       const BasicTensor<double>&);
template BasicTensor<float> attention_weights(const BasicTensor<float>&, const BasicTensor<float>&);
template BasicTensor<double> attention_weights(const BasicTensor<double>&, const BasicTensor<double>&);

}  // namespace amc
