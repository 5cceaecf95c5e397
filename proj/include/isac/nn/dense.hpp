#pragma once

#include <string>

#include "isac/error.hpp"
#include "isac/nn/gemm.hpp"
#include "isac/nn/param.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::nn {

// Fully connected layer: (N,F) -> (N,O), y = x W^T + b.
template <class T = double>
class Dense {
 public:
  Dense(std::size_t in_features, std::size_t out_features)
      : weights({out_features, in_features}),
        bias({out_features}),
        grad_weights({out_features, in_features}),
        grad_bias({out_features}) {}

  std::size_t in_features() const { return weights.dim(1); }
  std::size_t out_features() const { return weights.dim(0); }

  template <class Rng>
  void init(Rng& rng, double gain = 1.0) {
    init_uniform_fan_in(weights, in_features(), rng, gain);
    bias.fill(T{0});
  }

  Tensor<T> forward(Tensor<T> input) {
    if (input.rank() != 2) throw ShapeError("dense expects (N,F) input, got " + shape_str(input.shape()));
    if (input.dim(1) != in_features()) {
      throw ConfigError("dense input has " + std::to_string(input.dim(1)) + " features, layer expects " +
                        std::to_string(in_features()));
    }
    const std::size_t n = input.dim(0), f = in_features(), o = out_features();
    Tensor<T> out({n, o});
    auto y = detail::mat(out.ptr(), n, o);
    y.noalias() = detail::mat(static_cast<const T*>(input.ptr()), n, f) *
                  detail::mat(static_cast<const T*>(weights.ptr()), o, f).transpose();
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < o; ++c) y(r, c) += bias[c];
    }
    cache_ = std::move(input);
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) {
    if (cache_.empty()) throw StateError("dense backward called before forward");
    const std::size_t n = cache_.dim(0), f = in_features(), o = out_features();
    if (grad_out.shape() != Shape{n, o}) {
      throw ShapeError("dense grad_out shape " + shape_str(grad_out.shape()) + " does not match " +
                       shape_str({n, o}));
    }
    auto g = detail::mat(grad_out.ptr(), n, o);
    detail::mat(grad_weights.ptr(), o, f).noalias() = g.transpose() * detail::mat(cache_.ptr(), n, f);
    for (std::size_t c = 0; c < o; ++c) grad_bias[c] = g.col(c).sum();
    Tensor<T> grad_in({n, f});
    detail::mat(grad_in.ptr(), n, f).noalias() = g * detail::mat(static_cast<const T*>(weights.ptr()), o, f);
    return grad_in;
  }

  ParamList<T> params(const std::string& prefix) {
    return {{prefix + ".weights", &weights, &grad_weights}, {prefix + ".bias", &bias, &grad_bias}};
  }

  Tensor<T> weights;
  Tensor<T> bias;
  Tensor<T> grad_weights;
  Tensor<T> grad_bias;

 private:
  Tensor<T> cache_;
};

}  // namespace isac::nn
