#include "amc/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace amc {

std::size_t shape_numel(const Shape& shape) {
    std::size_t n = 1;
    for (std::size_t d : shape) n *= d;
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) os << 'x';
        os << shape[i];
    }
    os << ']';
    return os.str();
}

namespace {
thread_local bool g_grad_enabled = true;

void validate_shape(const Shape& shape) {
    for (std::size_t d : shape)
        if (d == 0) throw DimensionError("tensor dimensions must be positive, got " + shape_str(shape));
}
}  // namespace

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool grad_mode_enabled() { return g_grad_enabled; }

template <typename T>
BasicTensor<T> BasicTensor<T>::from(const Shape& shape, std::vector<T> values, bool requires_grad) {
    validate_shape(shape);
    if (values.size() != shape_numel(shape))
        throw DimensionError("tensor of shape " + shape_str(shape) + " needs " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(values.size()));
    auto s = std::make_shared<detail::TensorStorage<T>>();
    s->shape = shape;
    s->values = std::move(values);
    BasicTensor t(std::move(s));
    if (requires_grad) t.set_requires_grad(true);
    return t;
}

template <typename T>
BasicTensor<T> BasicTensor<T>::zeros(const Shape& shape, bool requires_grad) {
    return from(shape, std::vector<T>(shape_numel(shape), T(0)), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::full(const Shape& shape, T value, bool requires_grad) {
    return from(shape, std::vector<T>(shape_numel(shape), value), requires_grad);
}

template <typename T>
BasicTensor<T> BasicTensor<T>::scalar(T value, bool requires_grad) {
    return from({1}, {value}, requires_grad);
}

template <typename T>
const Shape& BasicTensor<T>::shape() const {
    if (!impl_) throw GraphError("use of an undefined tensor");
    return impl_->shape;
}

template <typename T>
std::size_t BasicTensor<T>::dim(std::size_t axis) const {
    const Shape& s = shape();
    if (axis >= s.size())
        throw DimensionError("axis " + std::to_string(axis) + " out of range for " + shape_str(s));
    return s[axis];
}

template <typename T>
std::span<T> BasicTensor<T>::values() {
    if (!impl_) throw GraphError("use of an undefined tensor");
    return impl_->values;
}

template <typename T>
std::span<const T> BasicTensor<T>::values() const {
    if (!impl_) throw GraphError("use of an undefined tensor");
    return impl_->values;
}

template <typename T>
T BasicTensor<T>::item() const {
    if (numel() != 1) throw DimensionError("item() on tensor of shape " + shape_str(shape()));
    return impl_->values[0];
}

template <typename T>
bool BasicTensor<T>::requires_grad() const {
    return impl_ && impl_->requires_grad;
}

template <typename T>
void BasicTensor<T>::set_requires_grad(bool on) {
    if (!impl_) throw GraphError("use of an undefined tensor");
    if (impl_->node) throw GraphError("requires_grad can only be changed on leaf tensors");
    impl_->requires_grad = on;
    if (on)
        impl_->grad.assign(impl_->values.size(), T(0));
    else
        impl_->grad.clear();
}

template <typename T>
std::span<T> BasicTensor<T>::grad() {
    if (!requires_grad()) throw GraphError("tensor does not require grad");
    return impl_->grad;
}

template <typename T>
std::span<const T> BasicTensor<T>::grad() const {
    if (!requires_grad()) throw GraphError("tensor does not require grad");
    return impl_->grad;
}

template <typename T>
void BasicTensor<T>::zero_grad() {
    if (requires_grad()) std::fill(impl_->grad.begin(), impl_->grad.end(), T(0));
}

template <typename T>
bool BasicTensor<T>::has_graph() const {
    return impl_ && impl_->node;
}

template <typename T>
void BasicTensor<T>::backward() {
    if (!has_graph()) throw GraphError("backward() called on a tensor with no recorded graph");
    if (numel() != 1) throw GraphError("backward() needs a scalar, got shape " + shape_str(shape()));

    // Iterative post-order DFS; `order` ends up topologically sorted.
    using Storage = detail::TensorStorage<T>;
    std::vector<Storage*> order;
    std::unordered_set<Storage*> visited;
    std::vector<std::pair<Storage*, std::size_t>> stack;
    stack.emplace_back(impl_.get(), 0);
    visited.insert(impl_.get());
    while (!stack.empty()) {
        auto& [s, next] = stack.back();
        if (s->node && next < s->node->inputs.size()) {
            Storage* child = s->node->inputs[next++].get();
            if (child->node && child->requires_grad && visited.insert(child).second)
                stack.emplace_back(child, 0);
            continue;
        }
        order.push_back(s);
        stack.pop_back();
    }

    impl_->grad[0] += T(1);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Storage* s = *it;
        s->node->backward(std::span<const T>(s->grad));
    }
}

template <typename T>
BasicTensor<T> BasicTensor<T>::detach() const {
    return from(shape(), std::vector<T>(values().begin(), values().end()));
}

template <typename T>
template <typename U>
BasicTensor<U> BasicTensor<T>::cast() const {
    std::vector<U> out(values().begin(), values().end());
    auto t = BasicTensor<U>::from(shape(), std::move(out));
    if (requires_grad() && !has_graph()) t.set_requires_grad(true);
    return t;
}

namespace detail {

template <typename T>
void check_finite_impl(const char* op_name, std::span<const T> values) {
    for (std::size_t i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw NumericError(std::string(op_name) + ": non-finite value at flat index " +
                               std::to_string(i));
}

void check_finite(const char* op_name, std::span<const float> values) {
    check_finite_impl(op_name, values);
}
void check_finite(const char* op_name, std::span<const double> values) {
    check_finite_impl(op_name, values);
}

template <typename T>
BasicTensor<T> make_result_impl(const char* op_name, Shape shape, std::vector<T> values,
                                std::vector<std::shared_ptr<TensorStorage<T>>> inputs,
                                std::function<void(std::span<const T>)> backward) {
    check_finite(op_name, std::span<const T>(values));
    auto s = std::make_shared<TensorStorage<T>>();
    s->shape = std::move(shape);
    s->values = std::move(values);
    bool needs_grad = false;
    if (grad_mode_enabled())
        for (const auto& in : inputs) needs_grad = needs_grad || in->requires_grad;
    if (needs_grad) {
        s->requires_grad = true;
        s->grad.assign(s->values.size(), T(0));
        auto node = std::make_shared<Node<T>>();
        node->name = op_name;
        node->inputs = std::move(inputs);
        node->backward = std::move(backward);
        s->node = std::move(node);
    }
    return BasicTensor<T>(std::move(s));
}

template <typename T>
BasicTensor<T> make_result(const char* op_name, Shape shape, std::vector<T> values,
                           std::initializer_list<const BasicTensor<T>*> inputs,
                           std::function<void(std::span<const T>)> backward) {
    std::vector<std::shared_ptr<TensorStorage<T>>> in;
    in.reserve(inputs.size());
    for (const auto* t : inputs) in.push_back(t->storage());
    return make_result_impl(op_name, std::move(shape), std::move(values), std::move(in),
                            std::move(backward));
}

template <typename T>
BasicTensor<T> make_result(const char* op_name, Shape shape, std::vector<T> values,
                           const std::vector<BasicTensor<T>>& inputs,
                           std::function<void(std::span<const T>)> backward) {
    std::vector<std::shared_ptr<TensorStorage<T>>> in;
    in.reserve(inputs.size());
    for (const auto& t : inputs) in.push_back(t.storage());
    return make_result_impl(op_name, std::move(shape), std::move(values), std::move(in),
                            std::move(backward));
}

template BasicTensor<float> make_result(const char*, Shape, std::vector<float>,
                                        std::initializer_list<const BasicTensor<float>*>,
                                        std::function<void(std::span<const float>)>);
template BasicTensor<double> make_result(const char*, Shape, std::vector<double>,
                                         std::initializer_list<const BasicTensor<double>*>,
                                         std::function<void(std::span<const double>)>);
template BasicTensor<float> make_result(const char*, Shape, std::vector<float>,
                                        const std::vector<BasicTensor<float>>&,
                                        std::function<void(std::span<const float>)>);
template BasicTensor<double> make_result(const char*, Shape, std::vector<double>,
                                         const std::vector<BasicTensor<double>>&,
                                         std::function<void(std::span<const double>)>);

}  // namespace detail

template class BasicTensor<float>;
template class BasicTensor<double>;
template BasicTensor<double> BasicTensor<float>::cast<double>() const;
template BasicTensor<float> BasicTensor<double>::cast<float>() const;
template BasicTensor<float> BasicTensor<float>::cast<float>() const;
template BasicTensor<double> BasicTensor<double>::cast<double>() const;

}  // namespace amc
