#pragma once

#include <Eigen/Core>

namespace isac::nn::detail {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MatMap = Eigen::Map<RowMat<T>>;
template <class T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;

template <class T>
MatMap<T> mat(T* p, Eigen::Index rows, Eigen::Index cols) {
  return MatMap<T>(p, rows, cols);
}
template <class T>
ConstMatMap<T> mat(const T* p, Eigen::Index rows, Eigen::Index cols) {
  return ConstMatMap<T>(p, rows, cols);
}

}  // namespace isac::nn::detail
