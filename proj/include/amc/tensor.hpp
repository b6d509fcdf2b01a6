// tensor.hpp - dense row-major tensor with reverse-mode automatic differentiation
//
// A BasicTensor is a cheap handle onto shared storage. Operations in ops.hpp
// record a node on their result whenever grad mode is enabled and at least one
// operand requires a gradient; backward() replays those nodes in reverse
// topological order, accumulating into every grad buffer on the way.
//
// Tensor (float) is the training type; Tensor64 (double) exists so that
// finite-difference gradient checks have enough precision.

#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "amc/errors.hpp"

namespace amc {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

template <typename T>
class BasicTensor;

namespace detail {

template <typename T>
struct Node;

template <typename T>
struct TensorStorage {
    Shape shape;
    std::vector<T> values;
    std::vector<T> grad;  // empty unless requires_grad
    bool requires_grad = false;
    std::shared_ptr<Node<T>> node;  // null for leaves
};

// Backward rule of one recorded operation. `inputs` keeps operands alive for
// the lifetime of the graph; `backward` receives the gradient of the output.
template <typename T>
struct Node {
    const char* name = "";
    std::vector<std::shared_ptr<TensorStorage<T>>> inputs;
    std::function<void(std::span<const T>)> backward;
};

}  // namespace detail

// Thread-local switch: while a NoGradGuard is alive, operations record nothing.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

bool grad_mode_enabled();

template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    static BasicTensor zeros(const Shape& shape, bool requires_grad = false);
    static BasicTensor full(const Shape& shape, T value, bool requires_grad = false);
    static BasicTensor from(const Shape& shape, std::vector<T> values, bool requires_grad = false);
    static BasicTensor scalar(T value, bool requires_grad = false);

    bool defined() const noexcept { return static_cast<bool>(impl_); }
    const Shape& shape() const;
    std::size_t rank() const { return shape().size(); }
    std::size_t dim(std::size_t axis) const;
    std::size_t numel() const { return values().size(); }

    std::span<T> values();
    std::span<const T> values() const;
    T item() const;
    T at(std::size_t flat_index) const { return values()[flat_index]; }

    bool requires_grad() const;
    // Marks this tensor as a leaf that accumulates gradients. Allocates a
    // zeroed grad buffer. Only leaves may be switched on.
    void set_requires_grad(bool on);
    std::span<T> grad();
    std::span<const T> grad() const;
    void zero_grad();

    bool has_graph() const;
    // Seeds d(this)/d(this) = 1 and propagates. `this` must be a scalar that
    // was produced by a recorded graph.
    void backward();

    // Copy of the values with no graph attached and requires_grad = false.
    BasicTensor detach() const;

    template <typename U>
    BasicTensor<U> cast() const;

    // Internal: used by operation implementations.
    const std::shared_ptr<detail::TensorStorage<T>>& storage() const { return impl_; }
    explicit BasicTensor(std::shared_ptr<detail::TensorStorage<T>> impl) : impl_(std::move(impl)) {}

private:
    std::shared_ptr<detail::TensorStorage<T>> impl_;
};

using Tensor = BasicTensor<float>;
using Tensor64 = BasicTensor<double>;

namespace detail {

// Wraps freshly computed values into a result tensor. Throws NumericError if
// any value is non-finite. When grad mode is on and some input requires a
// gradient, the result gets a grad buffer and a node with `backward`.
template <typename T>
BasicTensor<T> make_result(const char* op_name, Shape shape, std::vector<T> values,
                           std::initializer_list<const BasicTensor<T>*> inputs,
                           std::function<void(std::span<const T>)> backward);

template <typename T>
BasicTensor<T> make_result(const char* op_name, Shape shape, std::vector<T> values,
                           const std::vector<BasicTensor<T>>& inputs,
                           std::function<void(std::span<const T>)> backward);

// Gradient buffer of an operand if it needs one, else an empty span.
template <typename T>
std::span<T> grad_target(const std::shared_ptr<TensorStorage<T>>& s) {
    if (!s->requires_grad) return {};
    return std::span<T>(s->grad);
}

void check_finite(const char* op_name, std::span<const float> values);
void check_finite(const char* op_name, std::span<const double> values);

}  // namespace detail

}  // namespace amc
