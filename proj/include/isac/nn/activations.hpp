#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::nn {

// max(0, x). The backward mask is x > 0, so the gradient at exactly 0 is 0.
template <class T = double>
class Relu {
 public:
  Tensor<T> forward(Tensor<T> input) {
    mask_.resize(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
      mask_[i] = input[i] > T{0};
      if (!mask_[i]) input[i] = T{0};
    }
    shape_ = input.shape();
    ready_ = true;
    return input;
  }

  Tensor<T> backward(Tensor<T> grad_out) const {
    if (!ready_) throw StateError("relu backward called before forward");
    if (grad_out.shape() != shape_) throw ShapeError("relu grad_out shape " + shape_str(grad_out.shape()));
    for (std::size_t i = 0; i < grad_out.size(); ++i) {
      if (!mask_[i]) grad_out[i] = T{0};
    }
    return grad_out;
  }

  std::span<const std::uint8_t> mask() const { return mask_; }

 private:
  std::vector<std::uint8_t> mask_;
  Shape shape_;
  bool ready_ = false;
};

// Non-overlapping 2x2 max pooling, stride 2, over the last two axes of a
// (C,H,W) or (N,C,H,W) tensor. A trailing odd row/column is dropped. The
// gradient goes to the first maximum in row-major window order.
template <class T = double>
class MaxPool2 {
 public:
  Tensor<T> forward(const Tensor<T>& input) {
    if (input.rank() < 3) throw ShapeError("maxpool2 expects (C,H,W) or (N,C,H,W), got " + shape_str(input.shape()));
    const std::size_t h = input.dim(input.rank() - 2), w = input.dim(input.rank() - 1);
    if (h < 2 || w < 2) throw ShapeError("maxpool2 needs H >= 2 and W >= 2, got " + shape_str(input.shape()));
    const std::size_t ho = h / 2, wo = w / 2, planes = input.size() / (h * w);
    Shape out_shape = input.shape();
    out_shape[out_shape.size() - 2] = ho;
    out_shape.back() = wo;
    Tensor<T> out(out_shape);
    argmax_.resize(out.size());
    for (std::size_t p = 0; p < planes; ++p) {
      const T* in = input.ptr() + p * h * w;
      for (std::size_t y = 0; y < ho; ++y) {
        for (std::size_t x = 0; x < wo; ++x) {
          const std::size_t base = (2 * y) * w + 2 * x;
          const std::size_t cand[4] = {base, base + 1, base + w, base + w + 1};
          std::size_t best = cand[0];
          for (int k = 1; k < 4; ++k) {
            if (in[cand[k]] > in[best]) best = cand[k];
          }
          const std::size_t o = (p * ho + y) * wo + x;
          out[o] = in[best];
          argmax_[o] = static_cast<std::uint32_t>(p * h * w + best);
        }
      }
    }
    in_shape_ = input.shape();
    out_shape_ = std::move(out_shape);
    return out;
  }

  Tensor<T> backward(const Tensor<T>& grad_out) const {
    if (in_shape_.empty()) throw StateError("maxpool2 backward called before forward");
    if (grad_out.shape() != out_shape_) {
      throw ShapeError("maxpool2 grad_out shape " + shape_str(grad_out.shape()) + " does not match " +
                       shape_str(out_shape_));
    }
    Tensor<T> grad_in(in_shape_);
    for (std::size_t o = 0; o < grad_out.size(); ++o) grad_in[argmax_[o]] += grad_out[o];
    return grad_in;
  }

  std::span<const std::uint32_t> argmax() const { return argmax_; }

 private:
  std::vector<std::uint32_t> argmax_;
  Shape in_shape_;
  Shape out_shape_;
};

}  // namespace isac::nn
