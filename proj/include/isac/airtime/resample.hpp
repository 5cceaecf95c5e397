#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "isac/airtime/plan.hpp"
#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::airtime {

template <class T>
std::vector<T> subsample_axis(std::span<const T> values, std::size_t factor) {
  std::vector<T> out;
  for (std::size_t i = 0; i < values.size(); i += factor) out.push_back(values[i]);
  return out;
}

// Each kept value repeated `factor` times, truncated to `length`.
template <class T>
std::vector<T> upsample_axis(std::span<const T> kept, std::size_t factor, std::size_t length) {
  if (kept.size() != (length + factor - 1) / factor) throw ShapeError("kept count does not match ceil(d/f)");
  std::vector<T> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = kept[i / factor];
  return out;
}

// The kept sequence tiled cyclically to `length`.
template <class T>
std::vector<T> upsample_tiled_axis(std::span<const T> kept, std::size_t length) {
  if (kept.empty()) throw ShapeError("nothing to tile");
  std::vector<T> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = kept[i % kept.size()];
  return out;
}

enum class Upsampling { repeat, tiled };

// For each full-resolution index on `axis`, the original index whose value
// lands there after subsample followed by upsample.
inline std::vector<std::size_t> source_index_map(const SubsamplePlan& plan, std::size_t axis, Upsampling kind) {
  const auto& a = plan.axes[axis];
  std::vector<std::size_t> map(a.length);
  for (std::size_t i = 0; i < a.length; ++i) {
    map[i] = kind == Upsampling::repeat ? a.kept[i / a.factor] : a.kept[i % a.kept.size()];
  }
  return map;
}

namespace detail {

template <class T>
nn::Tensor<T> gather3(const nn::Tensor<T>& in, const std::array<std::vector<std::size_t>, 3>& maps) {
  nn::Tensor<T> out({maps[0].size(), maps[1].size(), maps[2].size()});
  const std::size_t h = in.dim(1), w = in.dim(2);
  T* dst = out.ptr();
  for (auto i : maps[0]) {
    for (auto j : maps[1]) {
      const T* row = in.ptr() + (i * h + j) * w;
      for (auto k : maps[2]) *dst++ = row[k];
    }
  }
  return out;
}

inline void check_dims(const nn::Shape& got, const std::array<std::size_t, 3>& want, const char* what) {
  if (got.size() != 3 || got[0] != want[0] || got[1] != want[1] || got[2] != want[2]) {
    throw ShapeError(std::string(what) + ": tensor shape " + nn::shape_str(got) + " does not match plan " +
                     nn::shape_str({want[0], want[1], want[2]}));
  }
}

}  // namespace detail

// Keeps the planned indices along each axis of a (t, tx, rx) window.
template <class T>
nn::Tensor<T> subsample(const nn::Tensor<T>& window, const SubsamplePlan& plan) {
  detail::check_dims(window.shape(), {plan.axes[0].length, plan.axes[1].length, plan.axes[2].length}, "subsample");
  return detail::gather3(window, {plan.axes[0].kept, plan.axes[1].kept, plan.axes[2].kept});
}

template <class T>
nn::Tensor<T> upsample_with(const nn::Tensor<T>& reduced, const SubsamplePlan& plan, Upsampling kind) {
  detail::check_dims(reduced.shape(), plan.reduced_dims(), "upsample");
  std::array<std::vector<std::size_t>, 3> maps;
  for (std::size_t a = 0; a < 3; ++a) {
    const auto& ax = plan.axes[a];
    maps[a].resize(ax.length);
    for (std::size_t i = 0; i < ax.length; ++i) {
      maps[a][i] = kind == Upsampling::repeat ? i / ax.factor : i % ax.kept.size();
    }
  }
  return detail::gather3(reduced, maps);
}

// Restores the original dims by repeating each kept value factor times.
template <class T>
nn::Tensor<T> upsample(const nn::Tensor<T>& reduced, const SubsamplePlan& plan) {
  return upsample_with(reduced, plan, Upsampling::repeat);
}

// Restores the original dims by tiling the kept sequence (ablation variant).
template <class T>
nn::Tensor<T> upsample_tiled(const nn::Tensor<T>& reduced, const SubsamplePlan& plan) {
  return upsample_with(reduced, plan, Upsampling::tiled);
}

}  // namespace isac::airtime
