#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/activations.hpp"
#include "isac/nn/adam.hpp"
#include "isac/nn/batchnorm.hpp"
#include "isac/nn/conv2d.hpp"
#include "isac/nn/dense.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::classifier {

using nn::Mode;
using nn::Tensor;

inline constexpr std::size_t kWindow = 20;
inline constexpr std::size_t kTxBeams = 50;
inline constexpr std::size_t kRxBeams = 56;
inline constexpr std::size_t kClasses = 8;
inline constexpr std::size_t kWindowSize = kWindow * kTxBeams * kRxBeams;

// 50x56 -conv3-> 48x54 -pool-> 24x27 -conv3-> 22x25 -pool-> 11x12
//       -conv7-> 5x6 -pool-> 2x3, times 64 channels.
inline constexpr std::size_t kFlatten = 64 * 2 * 3;

// Head init bound is kHeadInitGain/sqrt(fan_in). With gain 1 the pooled
// features (E[f^2] ~ 1.5) give logit variance ~0.5 and an initial loss near
// 2.30; gain 0.5 keeps it within 0.1 of ln 8.
inline constexpr double kHeadInitGain = 0.5;

// Three conv/batchnorm/relu/maxpool blocks followed by a dense head. The 20
// sweeps of a window are the input channels of the first convolution.
template <class T = double>
class ClassifierModel {
 public:
  explicit ClassifierModel(std::uint64_t seed = 0)
      : conv1(kWindow, 16, 3, 3),
        bn1(16),
        conv2(16, 32, 3, 3),
        bn2(32),
        conv3(32, 64, 7, 7),
        bn3(64),
        head(kFlatten, kClasses),
        rng_seed(seed) {
    std::mt19937_64 rng(seed);
    conv1.init(rng);
    conv2.init(rng);
    conv3.init(rng);
    head.init(rng, kHeadInitGain);
    adam = nn::AdamState<T>(params());
  }

  // (N,20,50,56) -> (N,8) logits.
  Tensor<T> forward(Tensor<T> batch, Mode mode) {
    if (batch.rank() != 4 || batch.dim(1) != kWindow) {
      throw ShapeError("classifier expects (N,20,50,56) input, got " + nn::shape_str(batch.shape()));
    }
    if (batch.dim(2) != kTxBeams || batch.dim(3) != kRxBeams) {
      throw ShapeError("classifier input spatial dims must be (50,56), got " + nn::shape_str(batch.shape()) +
                       "; smaller grids fall below the minimum size required by the network, upsample first");
    }
    mode_ = mode;
    const std::size_t n = batch.dim(0);
    auto x = conv1.forward(std::move(batch));
    x = pool1.forward(relu1.forward(bn1.forward(x, mode)));
    x = conv2.forward(std::move(x));
    x = pool2.forward(relu2.forward(bn2.forward(x, mode)));
    x = conv3.forward(std::move(x));
    x = pool3.forward(relu3.forward(bn3.forward(x, mode)));
    pooled_shape_ = x.shape();
    x.reshape({n, kFlatten});
    return head.forward(std::move(x));
  }

  // Backpropagates d(objective)/d(logits). After a train-mode forward this
  // fills every parameter gradient; after an eval-mode forward batchnorm is
  // treated as frozen (used for input saliency). Returns the input gradient
  // when requested, else an empty tensor.
  Tensor<T> backward(const Tensor<T>& grad_logits, bool want_input_grad = false) {
    if (!mode_) throw StateError("classifier backward called before forward");
    auto bn = [this](nn::BatchNorm2d<T>& layer, const Tensor<T>& g) {
      return *mode_ == Mode::train ? layer.backward(g) : layer.backward_frozen(g);
    };
    auto g = head.backward(grad_logits);
    g.reshape(pooled_shape_);
    g = conv3.backward(bn(bn3, relu3.backward(pool3.backward(g))));
    g = conv2.backward(bn(bn2, relu2.backward(pool2.backward(g))));
    return conv1.backward(bn(bn1, relu1.backward(pool1.backward(g))), want_input_grad);
  }

  nn::ParamList<T> params() {
    nn::ParamList<T> out;
    auto add = [&out](nn::ParamList<T> p) { out.insert(out.end(), p.begin(), p.end()); };
    add(conv1.params("conv1"));
    add(bn1.params("bn1"));
    add(conv2.params("conv2"));
    add(bn2.params("bn2"));
    add(conv3.params("conv3"));
    add(bn3.params("bn3"));
    add(head.params("head"));
    return out;
  }

  struct NamedTensor {
    std::string name;
    Tensor<T>* tensor;
  };

  // Parameters plus batchnorm running statistics, in checkpoint order.
  std::vector<NamedTensor> state_tensors() {
    std::vector<NamedTensor> out;
    for (auto& p : params()) out.push_back({p.name, p.value});
    auto add_bn = [&out](const std::string& prefix, nn::BatchNorm2d<T>& layer) {
      out.push_back({prefix + ".running_mean", &layer.running_mean});
      out.push_back({prefix + ".running_var", &layer.running_var});
    };
    add_bn("bn1", bn1);
    add_bn("bn2", bn2);
    add_bn("bn3", bn3);
    return out;
  }

  std::vector<Tensor<T>> snapshot() {
    std::vector<Tensor<T>> out;
    for (auto& t : state_tensors()) out.push_back(*t.tensor);
    return out;
  }

  void restore(const std::vector<Tensor<T>>& snap) {
    auto tensors = state_tensors();
    if (snap.size() != tensors.size()) throw StateError("snapshot does not match model layout");
    for (std::size_t i = 0; i < tensors.size(); ++i) *tensors[i].tensor = snap[i];
  }

  // Same weights and statistics at another precision.
  template <class U>
  ClassifierModel<U> cast() {
    ClassifierModel<U> out(rng_seed);
    auto src = state_tensors();
    auto dst = out.state_tensors();
    for (std::size_t i = 0; i < src.size(); ++i) *dst[i].tensor = src[i].tensor->template cast<U>();
    return out;
  }

  void adam_update(double lr) { nn::adam_step(params(), adam, lr); }

  // Hash of every relu mask and pool argmax from the last forward; changes
  // iff the input crossed a non-differentiable point.
  std::uint64_t activation_signature() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) { h = (h ^ v) * 1099511628211ULL; };
    for (const auto* r : {&relu1, &relu2, &relu3}) {
      for (auto m : r->mask()) mix(m);
    }
    for (const auto* p : {&pool1, &pool2, &pool3}) {
      for (auto a : p->argmax()) mix(a);
    }
    return h;
  }

  nn::Conv2d<T> conv1;
  nn::BatchNorm2d<T> bn1;
  nn::Relu<T> relu1;
  nn::MaxPool2<T> pool1;
  nn::Conv2d<T> conv2;
  nn::BatchNorm2d<T> bn2;
  nn::Relu<T> relu2;
  nn::MaxPool2<T> pool2;
  nn::Conv2d<T> conv3;
  nn::BatchNorm2d<T> bn3;
  nn::Relu<T> relu3;
  nn::MaxPool2<T> pool3;
  nn::Dense<T> head;
  nn::AdamState<T> adam;
  std::uint64_t rng_seed;

 private:
  std::optional<Mode> mode_;
  nn::Shape pooled_shape_;
};

template <class T = double>
ClassifierModel<T> build_model(std::uint64_t seed) {
  return ClassifierModel<T>(seed);
}

}  // namespace isac::classifier
