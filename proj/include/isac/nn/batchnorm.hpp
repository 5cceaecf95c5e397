#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/param.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::nn {

enum class Mode { train, eval };

// Per-channel batch normalization over (N,H,W) of an (N,C,H,W) tensor.
//
// Train mode normalizes with the biased batch variance and folds the
// unbiased variance into the running estimate:
//   running = (1 - momentum) * running + momentum * batch_stat
// Eval mode applies the running statistics as a fixed affine map.
template <class T = double>
class BatchNorm2d {
 public:
  explicit BatchNorm2d(std::size_t channels, double epsilon = 1e-5, double momentum = 0.1)
      : gamma({channels}, T{1}),
        beta({channels}, T{0}),
        running_mean({channels}, T{0}),
        running_var({channels}, T{1}),
        grad_gamma({channels}),
        grad_beta({channels}),
        epsilon(epsilon),
        momentum(momentum) {
    if (!(momentum > 0.0 && momentum <= 1.0)) throw ConfigError("batchnorm momentum must lie in (0,1]");
    if (!(epsilon > 0.0)) throw ConfigError("batchnorm epsilon must be positive");
  }

  std::size_t channels() const { return gamma.size(); }

  Tensor<T> forward(const Tensor<T>& input, Mode mode) {
    if (input.rank() != 4) throw ShapeError("batchnorm expects (N,C,H,W) input, got " + shape_str(input.shape()));
    const std::size_t n = input.dim(0), c = input.dim(1), hw = input.dim(2) * input.dim(3);
    if (c != channels()) {
      throw ConfigError("batchnorm input has " + std::to_string(c) + " channels, layer has " +
                        std::to_string(channels()));
    }
    if (mode == Mode::train && n < 2) {
      throw PreconditionError("batchnorm in train mode needs a batch of at least 2, got " + std::to_string(n));
    }
    last_mode_ = mode;
    Tensor<T> out(input.shape());
    inv_std_.assign(c, T{0});

    if (mode == Mode::eval) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const T inv = T{1} / std::sqrt(running_var[ch] + static_cast<T>(epsilon));
        inv_std_[ch] = inv;
        for (std::size_t s = 0; s < n; ++s) {
          const T* x = input.ptr() + (s * c + ch) * hw;
          T* y = out.ptr() + (s * c + ch) * hw;
          for (std::size_t i = 0; i < hw; ++i) y[i] = (x[i] - running_mean[ch]) * inv * gamma[ch] + beta[ch];
        }
      }
      xhat_ = Tensor<T>();
      return out;
    }

    xhat_ = Tensor<T>(input.shape());
    const T count = static_cast<T>(n * hw);
    for (std::size_t ch = 0; ch < c; ++ch) {
      T sum{0};
      for (std::size_t s = 0; s < n; ++s) {
        const T* x = input.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) sum += x[i];
      }
      const T mean = sum / count;
      T sq{0};
      for (std::size_t s = 0; s < n; ++s) {
        const T* x = input.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) sq += (x[i] - mean) * (x[i] - mean);
      }
      const T var = sq / count;
      const T inv = T{1} / std::sqrt(var + static_cast<T>(epsilon));
      inv_std_[ch] = inv;
      for (std::size_t s = 0; s < n; ++s) {
        const T* x = input.ptr() + (s * c + ch) * hw;
        T* xh = xhat_.ptr() + (s * c + ch) * hw;
        T* y = out.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          xh[i] = (x[i] - mean) * inv;
          y[i] = xh[i] * gamma[ch] + beta[ch];
        }
      }
      const T m = static_cast<T>(momentum);
      running_mean[ch] = (T{1} - m) * running_mean[ch] + m * mean;
      running_var[ch] = (T{1} - m) * running_var[ch] + m * (sq / (count - T{1}));
    }
    return out;
  }

  // Gradient through a train-mode forward (batch statistics are functions of
  // the input). Overwrites grad_gamma / grad_beta.
  Tensor<T> backward(const Tensor<T>& grad_out) {
    if (!last_mode_) throw StateError("batchnorm backward called before forward");
    if (*last_mode_ != Mode::train) {
      throw StateError("batchnorm backward requires a train-mode forward; use backward_frozen after eval");
    }
    check_grad_shape(grad_out, xhat_.shape());
    const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), hw = grad_out.dim(2) * grad_out.dim(3);
    const T count = static_cast<T>(n * hw);
    Tensor<T> grad_in(grad_out.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
      T sum_dy{0}, sum_dy_xhat{0};
      for (std::size_t s = 0; s < n; ++s) {
        const T* dy = grad_out.ptr() + (s * c + ch) * hw;
        const T* xh = xhat_.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) {
          sum_dy += dy[i];
          sum_dy_xhat += dy[i] * xh[i];
        }
      }
      grad_beta[ch] = sum_dy;
      grad_gamma[ch] = sum_dy_xhat;
      const T scale = gamma[ch] * inv_std_[ch] / count;
      for (std::size_t s = 0; s < n; ++s) {
        const T* dy = grad_out.ptr() + (s * c + ch) * hw;
        const T* xh = xhat_.ptr() + (s * c + ch) * hw;
        T* dx = grad_in.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) dx[i] = scale * (count * dy[i] - sum_dy - xh[i] * sum_dy_xhat);
      }
    }
    return grad_in;
  }

  // Input gradient through an eval-mode forward, where the layer is a fixed
  // per-channel affine map. Parameter gradients are left untouched.
  Tensor<T> backward_frozen(const Tensor<T>& grad_out) const {
    if (!last_mode_ || *last_mode_ != Mode::eval) {
      throw StateError("batchnorm backward_frozen requires an eval-mode forward");
    }
    if (grad_out.rank() != 4 || grad_out.dim(1) != channels()) {
      throw ShapeError("batchnorm grad_out shape " + shape_str(grad_out.shape()) + " is not (N,C,H,W)");
    }
    const std::size_t n = grad_out.dim(0), c = grad_out.dim(1), hw = grad_out.dim(2) * grad_out.dim(3);
    Tensor<T> grad_in(grad_out.shape());
    for (std::size_t ch = 0; ch < c; ++ch) {
      const T k = gamma[ch] * inv_std_[ch];
      for (std::size_t s = 0; s < n; ++s) {
        const T* dy = grad_out.ptr() + (s * c + ch) * hw;
        T* dx = grad_in.ptr() + (s * c + ch) * hw;
        for (std::size_t i = 0; i < hw; ++i) dx[i] = dy[i] * k;
      }
    }
    return grad_in;
  }

  ParamList<T> params(const std::string& prefix) {
    return {{prefix + ".gamma", &gamma, &grad_gamma}, {prefix + ".beta", &beta, &grad_beta}};
  }

  Tensor<T> gamma;
  Tensor<T> beta;
  Tensor<T> running_mean;
  Tensor<T> running_var;
  Tensor<T> grad_gamma;
  Tensor<T> grad_beta;
  double epsilon;
  double momentum;

 private:
  static void check_grad_shape(const Tensor<T>& g, const Shape& expected) {
    if (g.shape() != expected) {
      throw ShapeError("batchnorm grad_out shape " + shape_str(g.shape()) + " does not match " + shape_str(expected));
    }
  }

  std::optional<Mode> last_mode_;
  Tensor<T> xhat_;
  std::vector<T> inv_std_;
};

}  // namespace isac::nn
