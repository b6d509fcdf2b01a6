#include "amc/ops.hpp"

#include <algorithm>

#include "eigen_util.hpp"

namespace amc {

using detail::as_mat;
using detail::make_result;

namespace {

// Same-padded 1-D convolution over `cin` rows. conv2d_iq is the cin = 2 case
// (the kernel spans both I/Q rows), conv1d_same the k = 3 case.
struct ConvGeometry {
    std::size_t batch, cin, cout, len, k;
    std::size_t pad() const { return (k - 1) / 2; }
    std::size_t col_rows() const { return cin * k; }
};

// col[(c*k + t), l] = x[c, l + t - pad], zero outside the signal.
template <typename T>
void im2col(const ConvGeometry& g, const T* x, T* col) {
    const auto pad = static_cast<std::ptrdiff_t>(g.pad());
    const auto len = static_cast<std::ptrdiff_t>(g.len);
    for (std::size_t c = 0; c < g.cin; ++c)
        for (std::size_t t = 0; t < g.k; ++t) {
            T* dst = col + (c * g.k + t) * g.len;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(t) - pad;
            for (std::ptrdiff_t l = 0; l < len; ++l) {
                const std::ptrdiff_t src = l + shift;
                dst[l] = (src >= 0 && src < len) ? x[c * g.len + src] : T(0);
            }
        }
}

template <typename T>
void col2im_add(const ConvGeometry& g, const T* col, T* dx) {
    const auto pad = static_cast<std::ptrdiff_t>(g.pad());
    const auto len = static_cast<std::ptrdiff_t>(g.len);
    for (std::size_t c = 0; c < g.cin; ++c)
        for (std::size_t t = 0; t < g.k; ++t) {
            const T* src = col + (c * g.k + t) * g.len;
            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(t) - pad;
            for (std::ptrdiff_t l = 0; l < len; ++l) {
                const std::ptrdiff_t dst = l + shift;
                if (dst >= 0 && dst < len) dx[c * g.len + dst] += src[l];
            }
        }
}

template <typename T>
std::vector<T> conv_forward(const ConvGeometry& g, const T* x, const T* w, const T* bias) {
    std::vector<T> out(g.batch * g.cout * g.len);
    std::vector<T> col(g.col_rows() * g.len);
    const auto wm = as_mat(w, g.cout, g.col_rows());
    const auto bv = as_mat(bias, g.cout, 1);
    for (std::size_t b = 0; b < g.batch; ++b) {
        im2col(g, x + b * g.cin * g.len, col.data());
        auto om = as_mat(out.data() + b * g.cout * g.len, g.cout, g.len);
        om.noalias() = wm * as_mat(col.data(), g.col_rows(), g.len);
        om.colwise() += bv.col(0);
    }
    return out;
}

template <typename T>
std::function<void(std::span<const T>)> conv_backward(const ConvGeometry& geo,
                                                      std::shared_ptr<detail::TensorStorage<T>> sx,
                                                      std::shared_ptr<detail::TensorStorage<T>> sw,
                                                      std::shared_ptr<detail::TensorStorage<T>> sb) {
    return [geo, sx, sw, sb](std::span<const T> g) {
        std::vector<T> col(geo.col_rows() * geo.len);
        std::vector<T> dcol(sx->requires_grad ? col.size() : 0);
        const auto wm = as_mat(sw->values.data(), geo.cout, geo.col_rows());
        for (std::size_t b = 0; b < geo.batch; ++b) {
            const auto gm = as_mat(g.data() + b * geo.cout * geo.len, geo.cout, geo.len);
            if (sb->requires_grad)
                for (std::size_t c = 0; c < geo.cout; ++c) {
                    T acc = 0;
                    for (std::size_t t = 0; t < geo.len; ++t) acc += gm(Eigen::Index(c), Eigen::Index(t));
                    sb->grad[c] += acc;
                }
            if (sw->requires_grad) {
                im2col(geo, sx->values.data() + b * geo.cin * geo.len, col.data());
                as_mat(sw->grad.data(), geo.cout, geo.col_rows()).noalias() +=
                    gm * as_mat(col.data(), geo.col_rows(), geo.len).transpose();
            }
            if (sx->requires_grad) {
                as_mat(dcol.data(), geo.col_rows(), geo.len).noalias() = wm.transpose() * gm;
                col2im_add(geo, dcol.data(), sx->grad.data() + b * geo.cin * geo.len);
            }
        }
    };
}

}  // namespace

template <typename T>
BasicTensor<T> conv2d_iq(const BasicTensor<T>& input, const BasicTensor<T>& kernels, const BasicTensor<T>& bias) {
    const Shape& is = input.shape();
    const Shape& ks = kernels.shape();
    if (ks.size() != 4 || ks[1] != 1)
        throw DimensionError("conv2d_iq: kernels must be [C x 1 x 2 x K], got " + shape_str(ks));
    if (ks[3] % 2 == 0)
        throw ConfigError("conv2d_iq: kernel length must be odd, got " + std::to_string(ks[3]));
    if (is.size() != 4 || is[1] != 1)
        throw DimensionError("conv2d_iq: input must be [B x 1 x 2 x L], got " + shape_str(is));
    if (ks[2] != 2 || is[2] != 2)
        throw DimensionError("conv2d_iq: kernel height and input height must both be 2, got input " +
                             shape_str(is) + " and kernels " + shape_str(ks));
    if (bias.shape() != Shape{ks[0]})
        throw DimensionError("conv2d_iq: bias " + shape_str(bias.shape()) + " does not match kernels " +
                             shape_str(ks));
    const ConvGeometry geo{is[0], 2, ks[0], is[3], ks[3]};
    auto out = conv_forward(geo, input.values().data(), kernels.values().data(), bias.values().data());
    return make_result<T>("conv2d_iq", {geo.batch, geo.cout, 1, geo.len}, std::move(out), {&input, &kernels, &bias},
                          conv_backward<T>(geo, input.storage(), kernels.storage(), bias.storage()));
}

template <typename T>
BasicTensor<T> conv1d_same(const BasicTensor<T>& input, const BasicTensor<T>& kernels, const BasicTensor<T>& bias) {
    const Shape& is = input.shape();
    const Shape& ks = kernels.shape();
    if (ks.size() != 3 || ks[2] != 3)
        throw DimensionError("conv1d_same: kernels must be [Cout x Cin x 3], got " + shape_str(ks));
    if (is.size() != 3 || is[1] != ks[1])
        throw DimensionError("conv1d_same: input " + shape_str(is) + " does not match kernels " + shape_str(ks));
    if (bias.shape() != Shape{ks[0]})
        throw DimensionError("conv1d_same: bias " + shape_str(bias.shape()) + " does not match kernels " +
                             shape_str(ks));
    const ConvGeometry geo{is[0], is[1], ks[0], is[2], 3};
    auto out = conv_forward(geo, input.values().data(), kernels.values().data(), bias.values().data());
    return make_result<T>("conv1d_same", {geo.batch, geo.cout, geo.len}, std::move(out), {&input, &kernels, &bias},
                          conv_backward<T>(geo, input.storage(), kernels.storage(), bias.storage()));
}

template <typename T>
BasicTensor<T> channel_project(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias) {
    const Shape& xs = x.shape();
    if (xs.size() != 3 || weight.rank() != 2 || weight.dim(1) != xs[1] || bias.shape() != Shape{weight.dim(0)})
        throw DimensionError("channel_project: input " + shape_str(xs) + ", weight " + shape_str(weight.shape()) +
                             ", bias " + shape_str(bias.shape()) + " are incompatible");
    const ConvGeometry geo{xs[0], xs[1], weight.dim(0), xs[2], 1};
    auto out = conv_forward(geo, x.values().data(), weight.values().data(), bias.values().data());
    return make_result<T>("channel_project", {geo.batch, geo.cout, geo.len}, std::move(out), {&x, &weight, &bias},
                          conv_backward<T>(geo, x.storage(), weight.storage(), bias.storage()));
}

#define AMC_INSTANTIATE_CONV(T)                                                                              \
    template BasicTensor<T> conv2d_iq(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);   \
    template BasicTensor<T> conv1d_same(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
    template BasicTensor<T> channel_project(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&);

AMC_INSTANTIATE_CONV(float)
AMC_INSTANTIATE_CONV(double)

}  // namespace amc
