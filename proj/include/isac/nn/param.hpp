#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "isac/nn/tensor.hpp"

namespace isac::nn {

// A trainable tensor together with its gradient accumulator.
template <class T>
struct Param {
  std::string name;
  Tensor<T>* value;
  Tensor<T>* grad;
};

template <class T>
using ParamList = std::vector<Param<T>>;

// U(-gain/sqrt(fan_in), gain/sqrt(fan_in)).
template <class T, class Rng>
void init_uniform_fan_in(Tensor<T>& t, std::size_t fan_in, Rng& rng, double gain = 1.0) {
  const double bound = gain / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.data()) v = static_cast<T>(dist(rng));
}

}  // namespace isac::nn
