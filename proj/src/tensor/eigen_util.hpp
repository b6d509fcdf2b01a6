// Internal helpers for viewing tensor buffers as Eigen matrices.
#pragma once

#include <Eigen/Core>

namespace amc::detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;

template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <typename T>
MatMap<T> as_mat(T* data, Eigen::Index rows, Eigen::Index cols) {
    return MatMap<T>(data, rows, cols);
}

template <typename T>
ConstMatMap<T> as_mat(const T* data, Eigen::Index rows, Eigen::Index cols) {
    return ConstMatMap<T>(data, rows, cols);
}

}  // namespace amc::detail
