#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/param.hpp"

namespace isac::nn {

// Bias-corrected Adam. m/v are laid out in the order of the parameter list
// the state was created from.
template <class T = double>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(const ParamList<T>& params) {
    for (const auto& p : params) {
      m.emplace_back(p.value->shape());
      v.emplace_back(p.value->shape());
    }
  }
};

template <class T>
void adam_step(const ParamList<T>& params, AdamState<T>& state, double lr) {
  if (params.size() != state.m.size() || params.size() != state.v.size()) {
    throw ConfigError("adam state holds " + std::to_string(state.m.size()) + " moments for " +
                      std::to_string(params.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params[i];
    if (p.value->shape() != p.grad->shape() || p.value->shape() != state.m[i].shape() ||
        p.value->shape() != state.v[i].shape()) {
      throw ConfigError("adam shape mismatch for parameter " + p.name);
    }
  }
  ++state.step;
  const T b1 = static_cast<T>(state.beta1), b2 = static_cast<T>(state.beta2);
  const T c1 = T{1} - static_cast<T>(std::pow(state.beta1, static_cast<double>(state.step)));
  const T c2 = T{1} - static_cast<T>(std::pow(state.beta2, static_cast<double>(state.step)));
  const T rate = static_cast<T>(lr), eps = static_cast<T>(state.eps);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& w = *params[i].value;
    const auto& g = *params[i].grad;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t j = 0; j < w.size(); ++j) {
      m[j] = b1 * m[j] + (T{1} - b1) * g[j];
      v[j] = b2 * v[j] + (T{1} - b2) * g[j] * g[j];
      const T mhat = m[j] / c1;
      const T vhat = v[j] / c2;
      w[j] -= rate * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace isac::nn
