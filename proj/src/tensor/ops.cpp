#include "amc/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigen_util.hpp"

namespace amc {

using detail::as_mat;
using detail::grad_target;
using detail::make_result;

namespace {

template <typename T>
void require_rank(const char* op, const BasicTensor<T>& t, std::size_t rank, const char* what) {
    if (t.rank() != rank)
        throw DimensionError(std::string(op) + ": " + what + " must have rank " + std::to_string(rank) +
                             ", got " + shape_str(t.shape()));
}

template <typename T>
void require_same_shape(const char* op, const BasicTensor<T>& a, const BasicTensor<T>& b) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                             shape_str(b.shape()));
}

}  // namespace

template <typename T>
BasicTensor<T> matmul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_rank("matmul", a, 2, "lhs");
    require_rank("matmul", b, 2, "rhs");
    const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
    if (b.dim(0) != k)
        throw DimensionError("matmul: inner dimensions differ: " + shape_str(a.shape()) + " * " +
                             shape_str(b.shape()));
    std::vector<T> out(m * n);
    as_mat(out.data(), m, n).noalias() = as_mat(a.values().data(), m, k) * as_mat(b.values().data(), k, n);

    auto sa = a.storage(), sb = b.storage();
    return make_result<T>("matmul", {m, n}, std::move(out), {&a, &b}, [sa, sb, m, k, n](std::span<const T> g) {
        auto gm = as_mat(g.data(), m, n);
        if (sa->requires_grad)
            as_mat(sa->grad.data(), m, k).noalias() += gm * as_mat(sb->values.data(), k, n).transpose();
        if (sb->requires_grad)
            as_mat(sb->grad.data(), k, n).noalias() += as_mat(sa->values.data(), m, k).transpose() * gm;
    });
}

template <typename T>
BasicTensor<T> linear(const BasicTensor<T>& x, const BasicTensor<T>& weight, const BasicTensor<T>& bias) {
    require_rank("linear", x, 2, "input");
    require_rank("linear", weight, 2, "weight");
    require_rank("linear", bias, 1, "bias");
    const auto batch = x.dim(0), in = x.dim(1), out_dim = weight.dim(0);
    if (weight.dim(1) != in || bias.dim(0) != out_dim)
        throw DimensionError("linear: input " + shape_str(x.shape()) + " incompatible with weight " +
                             shape_str(weight.shape()) + " and bias " + shape_str(bias.shape()));
    std::vector<T> out(batch * out_dim);
    auto om = as_mat(out.data(), batch, out_dim);
    om.noalias() = as_mat(x.values().data(), batch, in) * as_mat(weight.values().data(), out_dim, in).transpose();
    om.rowwise() += as_mat(bias.values().data(), 1, out_dim).row(0);

    auto sx = x.storage(), sw = weight.storage(), sb = bias.storage();
    return make_result<T>("linear", {batch, out_dim}, std::move(out), {&x, &weight, &bias},
                          [sx, sw, sb, batch, in, out_dim](std::span<const T> g) {
                              auto gm = as_mat(g.data(), batch, out_dim);
                              if (sx->requires_grad)
                                  as_mat(sx->grad.data(), batch, in).noalias() +=
                                      gm * as_mat(sw->values.data(), out_dim, in);
                              if (sw->requires_grad)
                                  as_mat(sw->grad.data(), out_dim, in).noalias() +=
                                      gm.transpose() * as_mat(sx->values.data(), batch, in);
                              // plain loop: Eigen's colwise sum rounds differently with buffer alignment
                              if (sb->requires_grad)
                                  for (std::size_t b = 0; b < batch; ++b)
                                      for (std::size_t o = 0; o < out_dim; ++o) sb->grad[o] += g[b * out_dim + o];
                          });
}

template <typename T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
    auto in = x.values();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > T(0) ? in[i] : T(0);
    auto sx = x.storage();
    return make_result<T>("relu", x.shape(), std::move(out), {&x}, [sx](std::span<const T> g) {
        for (std::size_t i = 0; i < g.size(); ++i)
            if (sx->values[i] > T(0)) sx->grad[i] += g[i];
    });
}

template <typename T>
BasicTensor<T> tanh(const BasicTensor<T>& x) {
    auto in = x.values();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = std::tanh(in[i]);
    auto sx = x.storage();
    return make_result<T>("tanh", x.shape(), std::move(out), {&x}, [sx](std::span<const T> g) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            const T y = std::tanh(sx->values[i]);
            sx->grad[i] += g[i] * (T(1) - y * y);
        }
    });
}

namespace {
template <typename T>
void softmax_rows(const T* in, T* out, std::size_t rows, std::size_t cols) {
    for (std::size_t r = 0; r < rows; ++r) {
        const T* x = in + r * cols;
        T* y = out + r * cols;
        const T mx = *std::max_element(x, x + cols);
        T total = 0;
        for (std::size_t c = 0; c < cols; ++c) {
            y[c] = std::exp(x[c] - mx);
            total += y[c];
        }
        const T inv = T(1) / total;
        for (std::size_t c = 0; c < cols; ++c) y[c] *= inv;
    }
}
}  // namespace

template <typename T>
BasicTensor<T> softmax(const BasicTensor<T>& x) {
    const std::size_t cols = x.shape().back();
    const std::size_t rows = x.numel() / cols;
    std::vector<T> out(x.numel());
    softmax_rows(x.values().data(), out.data(), rows, cols);
    auto sx = x.storage();
    return make_result<T>("softmax", x.shape(), std::move(out), {&x}, [sx, rows, cols](std::span<const T> g) {
        std::vector<T> y(rows * cols);
        softmax_rows(sx->values.data(), y.data(), rows, cols);
        for (std::size_t r = 0; r < rows; ++r) {
            T dot = 0;
            for (std::size_t c = 0; c < cols; ++c) dot += g[r * cols + c] * y[r * cols + c];
            for (std::size_t c = 0; c < cols; ++c)
                sx->grad[r * cols + c] += y[r * cols + c] * (g[r * cols + c] - dot);
        }
    });
}

template <typename T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_same_shape("add", a, b);
    auto va = a.values(), vb = b.values();
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] + vb[i];
    auto sa = a.storage(), sb = b.storage();
    return make_result<T>("add", a.shape(), std::move(out), {&a, &b}, [sa, sb](std::span<const T> g) {
        for (auto* s : {sa.get(), sb.get()})
            if (s->requires_grad)
                for (std::size_t i = 0; i < g.size(); ++i) s->grad[i] += g[i];
    });
}

template <typename T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
    require_same_shape("mul", a, b);
    auto va = a.values(), vb = b.values();
    std::vector<T> out(va.size());
    for (std::size_t i = 0; i < va.size(); ++i) out[i] = va[i] * vb[i];
    auto sa = a.storage(), sb = b.storage();
    return make_result<T>("mul", a.shape(), std::move(out), {&a, &b}, [sa, sb](std::span<const T> g) {
        if (sa->requires_grad)
            for (std::size_t i = 0; i < g.size(); ++i) sa->grad[i] += g[i] * sb->values[i];
        if (sb->requires_grad)
            for (std::size_t i = 0; i < g.size(); ++i) sb->grad[i] += g[i] * sa->values[i];
    });
}

template <typename T>
BasicTensor<T> scale(const BasicTensor<T>& x, T factor) {
    auto in = x.values();
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] * factor;
    auto sx = x.storage();
    return make_result<T>("scale", x.shape(), std::move(out), {&x}, [sx, factor](std::span<const T> g) {
        for (std::size_t i = 0; i < g.size(); ++i) sx->grad[i] += g[i] * factor;
    });
}

template <typename T>
BasicTensor<T> sum(const BasicTensor<T>& x) {
    T total = 0;
    for (T v : x.values()) total += v;
    auto sx = x.storage();
    return make_result<T>("sum", {1}, {total}, {&x}, [sx](std::span<const T> g) {
        for (auto& gi : sx->grad) gi += g[0];
    });
}

template <typename T>
BasicTensor<T> concat_channels(const std::vector<BasicTensor<T>>& parts) {
    if (parts.empty()) throw DimensionError("concat_channels: no inputs");
    const Shape& first = parts.front().shape();
    if (first.size() < 2) throw DimensionError("concat_channels: inputs need rank >= 2, got " + shape_str(first));
    const std::size_t batch = first[0];
    const std::size_t inner = shape_numel(first) / (first[0] * first[1]);
    std::size_t channels = 0;
    std::vector<std::size_t> widths;
    for (const auto& p : parts) {
        const Shape& s = p.shape();
        bool ok = s.size() == first.size() && s[0] == batch;
        for (std::size_t a = 2; ok && a < s.size(); ++a) ok = s[a] == first[a];
        if (!ok)
            throw DimensionError("concat_channels: " + shape_str(s) + " does not match " + shape_str(first) +
                                 " outside axis 1");
        channels += s[1];
        widths.push_back(s[1] * inner);
    }
    Shape out_shape = first;
    out_shape[1] = channels;
    const std::size_t row = channels * inner;
    std::vector<T> out(batch * row);
    std::size_t offset = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
        auto v = parts[p].values();
        for (std::size_t b = 0; b < batch; ++b)
            std::copy_n(v.data() + b * widths[p], widths[p], out.data() + b * row + offset);
        offset += widths[p];
    }
    std::vector<std::shared_ptr<detail::TensorStorage<T>>> stores;
    for (const auto& p : parts) stores.push_back(p.storage());
    return make_result<T>("concat_channels", out_shape, std::move(out), parts,
                          [stores, widths, batch, row](std::span<const T> g) {
                              std::size_t off = 0;
                              for (std::size_t p = 0; p < stores.size(); ++p) {
                                  if (stores[p]->requires_grad)
                                      for (std::size_t b = 0; b < batch; ++b)
                                          for (std::size_t i = 0; i < widths[p]; ++i)
                                              stores[p]->grad[b * widths[p] + i] += g[b * row + off + i];
                                  off += widths[p];
                              }
                          });
}

template <typename T>
BasicTensor<T> global_avg_pool(const BasicTensor<T>& x) {
    const Shape& s = x.shape();
    if (s.size() < 2) throw DimensionError("global_avg_pool: input needs rank >= 2, got " + shape_str(s));
    const std::size_t len = s.back();
    const std::size_t rows = x.numel() / len;
    auto in = x.values();
    std::vector<T> out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        T total = 0;
        for (std::size_t l = 0; l < len; ++l) total += in[r * len + l];
        out[r] = total / T(len);
    }
    Shape out_shape(s.begin(), s.end() - 1);
    auto sx = x.storage();
    return make_result<T>("global_avg_pool", out_shape, std::move(out), {&x}, [sx, rows, len](std::span<const T> g) {
        for (std::size_t r = 0; r < rows; ++r) {
            const T share = g[r] / T(len);
            for (std::size_t l = 0; l < len; ++l) sx->grad[r * len + l] += share;
        }
    });
}

template <typename T>
BasicTensor<T> reshape(const BasicTensor<T>& x, const Shape& shape) {
    if (shape_numel(shape) != x.numel())
        throw DimensionError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
    std::vector<T> out(x.values().begin(), x.values().end());
    auto sx = x.storage();
    return make_result<T>("reshape", shape, std::move(out), {&x}, [sx](std::span<const T> g) {
        for (std::size_t i = 0; i < g.size(); ++i) sx->grad[i] += g[i];
    });
}

template <typename T>
BasicTensor<T> select_row(const BasicTensor<T>& x, std::size_t row) {
    require_rank("select_row", x, 3, "input");
    const auto batch = x.dim(0), rows = x.dim(1), len = x.dim(2);
    if (row >= rows)
        throw DimensionError("select_row: row " + std::to_string(row) + " out of range for " + shape_str(x.shape()));
    auto in = x.values();
    std::vector<T> out(batch * len);
    for (std::size_t b = 0; b < batch; ++b)
        std::copy_n(in.data() + (b * rows + row) * len, len, out.data() + b * len);
    auto sx = x.storage();
    return make_result<T>("select_row", {batch, len}, std::move(out), {&x},
                          [sx, batch, rows, len, row](std::span<const T> g) {
                              for (std::size_t b = 0; b < batch; ++b)
                                  for (std::size_t l = 0; l < len; ++l)
                                      sx->grad[(b * rows + row) * len + l] += g[b * len + l];
                          });
}

template <typename T>
BasicTensor<T> stack_rows(const std::vector<BasicTensor<T>>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows: no inputs");
    for (const auto& r : rows) {
        require_rank("stack_rows", r, 2, "each row");
        require_same_shape("stack_rows", r, rows.front());
    }
    const auto batch = rows.front().dim(0), len = rows.front().dim(1), count = rows.size();
    std::vector<T> out(batch * count * len);
    for (std::size_t r = 0; r < count; ++r) {
        auto v = rows[r].values();
        for (std::size_t b = 0; b < batch; ++b)
            std::copy_n(v.data() + b * len, len, out.data() + (b * count + r) * len);
    }
    std::vector<std::shared_ptr<detail::TensorStorage<T>>> stores;
    for (const auto& r : rows) stores.push_back(r.storage());
    return make_result<T>("stack_rows", {batch, count, len}, std::move(out), rows,
                          [stores, batch, count, len](std::span<const T> g) {
                              for (std::size_t r = 0; r < count; ++r) {
                                  if (!stores[r]->requires_grad) continue;
                                  for (std::size_t b = 0; b < batch; ++b)
                                      for (std::size_t l = 0; l < len; ++l)
                                          stores[r]->grad[b * len + l] += g[(b * count + r) * len + l];
                              }
                          });
}

template <typename T>
BasicTensor<T> cross_entropy(const BasicTensor<T>& logits, std::span<const int> labels) {
    require_rank("cross_entropy", logits, 2, "logits");
    const auto batch = logits.dim(0), classes = logits.dim(1);
    if (labels.size() != batch)
        throw DimensionError("cross_entropy: " + std::to_string(labels.size()) + " labels for logits " +
                             shape_str(logits.shape()));
    for (int y : labels)
        if (y < 0 || static_cast<std::size_t>(y) >= classes)
            throw std::out_of_range("cross_entropy: label " + std::to_string(y) + " outside [0, " +
                                    std::to_string(classes) + ")");
    auto z = logits.values();
    T total = 0;
    for (std::size_t b = 0; b < batch; ++b) {
        const T* row = z.data() + b * classes;
        const T mx = *std::max_element(row, row + classes);
        T acc = 0;
        for (std::size_t c = 0; c < classes; ++c) acc += std::exp(row[c] - mx);
        total += mx + std::log(acc) - row[labels[b]];
    }
    std::vector<int> owned(labels.begin(), labels.end());
    auto sz = logits.storage();
    return make_result<T>("cross_entropy", {1}, {total / T(batch)}, {&logits},
                          [sz, owned, batch, classes](std::span<const T> g) {
                              std::vector<T> p(batch * classes);
                              softmax_rows(sz->values.data(), p.data(), batch, classes);
                              const T share = g[0] / T(batch);
                              for (std::size_t b = 0; b < batch; ++b)
                                  for (std::size_t c = 0; c < classes; ++c) {
                                      const T target = static_cast<int>(c) == owned[b] ? T(1) : T(0);
                                      sz->grad[b * classes + c] += share * (p[b * classes + c] - target);
                                  }
                          });
}

#define AMC_INSTANTIATE_OPS(T)                                                                         \
    template BasicTensor<T> matmul(const BasicTensor<T>&, const BasicTensor<T>&);                      \
    template BasicTensor<T> linear(const BasicTensor<T>&, const BasicTensor<T>&, const BasicTensor<T>&); \
    template BasicTensor<T> relu(const BasicTensor<T>&);                                               \
    template BasicTensor<T> tanh(const BasicTensor<T>&);                                               \
    template BasicTensor<T> softmax(const BasicTensor<T>&);                                            \
    template BasicTensor<T> add(const BasicTensor<T>&, const BasicTensor<T>&);                         \
    template BasicTensor<T> mul(const BasicTensor<T>&, const BasicTensor<T>&);                         \
    template BasicTensor<T> scale(const BasicTensor<T>&, T);                                           \
    template BasicTensor<T> sum(const BasicTensor<T>&);                                                \
    template BasicTensor<T> concat_channels(const std::vector<BasicTensor<T>>&);                       \
    template BasicTensor<T> global_avg_pool(const BasicTensor<T>&);                                    \
    template BasicTensor<T> reshape(const BasicTensor<T>&, const Shape&);                              \
    template BasicTensor<T> select_row(const BasicTensor<T>&, std::size_t);                            \
    template BasicTensor<T> stack_rows(const std::vector<BasicTensor<T>>&);                            \
    template BasicTensor<T> cross_entropy(const BasicTensor<T>&, std::span<const int>);

AMC_INSTANTIATE_OPS(float)
AMC_INSTANTIATE_OPS(double)

}  // namespace amc
