#pragma once

#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/gemm.hpp"
#include "isac/nn/param.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::nn {

// Valid (unpadded) stride-1 2D cross-correlation with per-channel bias.
// Accepts (N,C,H,W) batches or a single (C,H,W) sample.
template <class T = double>
class Conv2d {
 public:
  Conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel_h, std::size_t kernel_w)
      : kernels({out_channels, in_channels, kernel_h, kernel_w}),
        bias({out_channels}),
        grad_kernels({out_channels, in_channels, kernel_h, kernel_w}),
        grad_bias({out_channels}) {
    if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
      throw ConfigError("conv kernel dimensions must be odd, got " + std::to_string(kernel_h) + "x" +
                        std::to_string(kernel_w));
    }
  }

  std::size_t in_channels() const { return kernels.dim(1); }
  std::size_t out_channels() const { return kernels.dim(0); }
  std::size_t kernel_h() const { return kernels.dim(2); }
  std::size_t kernel_w() const { return kernels.dim(3); }

  template <class Rng>
  void init(Rng& rng) {
    init_uniform_fan_in(kernels, in_channels() * kernel_h() * kernel_w(), rng);
    bias.fill(T{0});
  }

  Tensor<T> forward(Tensor<T> input) {
    single_ = input.rank() == 3;
    if (single_) input.reshape({1, input.dim(0), input.dim(1), input.dim(2)});
    if (input.rank() != 4) throw ShapeError("conv2d expects (N,C,H,W) input, got " + shape_str(input.shape()));
    const std::size_t n = input.dim(0), c = input.dim(1), h = input.dim(2), w = input.dim(3);
    if (c != in_channels()) {
      throw ConfigError("conv2d input channel dimension is " + std::to_string(c) + ", layer expects " +
                        std::to_string(in_channels()));
    }
    if (h < kernel_h()) {
      throw ShapeError("conv2d input height " + std::to_string(h) + " smaller than kernel height " +
                       std::to_string(kernel_h()));
    }
    if (w < kernel_w()) {
      throw ShapeError("conv2d input width " + std::to_string(w) + " smaller than kernel width " +
                       std::to_string(kernel_w()));
    }
    const std::size_t ho = h - kernel_h() + 1, wo = w - kernel_w() + 1;
    const std::size_t ckk = c * kernel_h() * kernel_w(), p = ho * wo, o = out_channels();

    Tensor<T> out({n, o, ho, wo});
    col_.resize(ckk * p);
    auto kmat = detail::mat(kernels.ptr(), o, ckk);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(input.slab(s).data(), c, h, w);
      auto omat = detail::mat(out.slab(s).data(), o, p);
      omat.noalias() = kmat * detail::mat(static_cast<const T*>(col_.data()), ckk, p);
      for (std::size_t oc = 0; oc < o; ++oc) omat.row(oc).array() += bias[oc];
    }
    cache_ = std::move(input);
    if (single_) out.reshape({o, ho, wo});
    return out;
  }

  // Fills grad_kernels / grad_bias (overwriting) and returns the input
  // gradient, or an empty tensor when want_input_grad is false.
  Tensor<T> backward(Tensor<T> grad_out, bool want_input_grad = true) {
    if (cache_.empty()) throw StateError("conv2d backward called before forward");
    if (single_ && grad_out.rank() == 3) grad_out.reshape({1, grad_out.dim(0), grad_out.dim(1), grad_out.dim(2)});
    const std::size_t n = cache_.dim(0), c = cache_.dim(1), h = cache_.dim(2), w = cache_.dim(3);
    const std::size_t ho = h - kernel_h() + 1, wo = w - kernel_w() + 1;
    const std::size_t ckk = c * kernel_h() * kernel_w(), p = ho * wo, o = out_channels();
    if (grad_out.shape() != Shape{n, o, ho, wo}) {
      throw ShapeError("conv2d grad_out shape " + shape_str(grad_out.shape()) + " does not match output " +
                       shape_str({n, o, ho, wo}));
    }

    grad_kernels.fill(T{0});
    grad_bias.fill(T{0});
    Tensor<T> grad_in;
    if (want_input_grad) grad_in = Tensor<T>(cache_.shape());
    std::vector<T> gcol(want_input_grad ? ckk * p : 0);

    auto kmat = detail::mat(static_cast<const T*>(kernels.ptr()), o, ckk);
    auto gkmat = detail::mat(grad_kernels.ptr(), o, ckk);
    col_.resize(ckk * p);
    for (std::size_t s = 0; s < n; ++s) {
      im2col(cache_.slab(s).data(), c, h, w);
      auto gmat = detail::mat(static_cast<const T*>(grad_out.slab(s).data()), o, p);
      auto cmat = detail::mat(static_cast<const T*>(col_.data()), ckk, p);
      gkmat.noalias() += gmat * cmat.transpose();
      for (std::size_t oc = 0; oc < o; ++oc) grad_bias[oc] += gmat.row(oc).sum();
      if (want_input_grad) {
        detail::mat(gcol.data(), ckk, p).noalias() = kmat.transpose() * gmat;
        col2im(gcol.data(), grad_in.slab(s).data(), c, h, w);
      }
    }
    if (want_input_grad && single_) grad_in.reshape({c, h, w});
    return grad_in;
  }

  ParamList<T> params(const std::string& prefix) {
    return {{prefix + ".kernels", &kernels, &grad_kernels}, {prefix + ".bias", &bias, &grad_bias}};
  }

  Tensor<T> kernels;
  Tensor<T> bias;
  Tensor<T> grad_kernels;
  Tensor<T> grad_bias;

 private:
  void im2col(const T* in, std::size_t c, std::size_t h, std::size_t w) {
    const std::size_t kh = kernel_h(), kw = kernel_w(), ho = h - kh + 1, wo = w - kw + 1;
    T* dst = col_.data();
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < kh; ++i) {
        for (std::size_t j = 0; j < kw; ++j) {
          for (std::size_t y = 0; y < ho; ++y) {
            const T* src = in + (ch * h + y + i) * w + j;
            std::copy(src, src + wo, dst);
            dst += wo;
          }
        }
      }
    }
  }

  void col2im(const T* col, T* out, std::size_t c, std::size_t h, std::size_t w) const {
    const std::size_t kh = kernel_h(), kw = kernel_w(), ho = h - kh + 1, wo = w - kw + 1;
    for (std::size_t ch = 0; ch < c; ++ch) {
      for (std::size_t i = 0; i < kh; ++i) {
        for (std::size_t j = 0; j < kw; ++j) {
          for (std::size_t y = 0; y < ho; ++y) {
            T* dst = out + (ch * h + y + i) * w + j;
            for (std::size_t x = 0; x < wo; ++x) dst[x] += col[x];
            col += wo;
          }
        }
      }
    }
  }

  Tensor<T> cache_;
  std::vector<T> col_;
  bool single_ = false;
};

}  // namespace isac::nn
