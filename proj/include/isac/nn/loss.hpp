#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::nn {

template <class T>
struct LossResult {
  T loss;
  Tensor<T> grad_logits;
};

// Mean softmax cross-entropy over the batch, max-subtracted. The gradient is
// (softmax - onehot) / N.
template <class T = double>
LossResult<T> softmax_cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  if (logits.rank() != 2) throw ShapeError("logits must be (N,K), got " + shape_str(logits.shape()));
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  if (labels.size() != n) {
    throw ShapeError("label count " + std::to_string(labels.size()) + " does not match batch " + std::to_string(n));
  }
  LossResult<T> r{T{0}, Tensor<T>(logits.shape())};
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= k) {
      throw InputError("label " + std::to_string(labels[i]) + " outside [0," + std::to_string(k) + ")");
    }
    const T* z = logits.ptr() + i * k;
    T* g = r.grad_logits.ptr() + i * k;
    const T zmax = *std::max_element(z, z + k);
    T denom{0};
    for (std::size_t j = 0; j < k; ++j) {
      g[j] = std::exp(z[j] - zmax);
      denom += g[j];
    }
    const T log_denom = std::log(denom);
    r.loss += log_denom - (z[labels[i]] - zmax);
    for (std::size_t j = 0; j < k; ++j) g[j] = g[j] / denom / static_cast<T>(n);
    g[labels[i]] -= T{1} / static_cast<T>(n);
  }
  r.loss /= static_cast<T>(n);
  return r;
}

// Index of the largest entry; ties resolve to the lowest index.
template <class T>
int argmax(std::span<const T> row) {
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace isac::nn
