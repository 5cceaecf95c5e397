#pragma once

#include <cstdint>
#include <vector>

#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"
#include "isac/sweepgen/frames.hpp"

namespace isac::dataset {

inline constexpr std::size_t kWindowLength = 20;

// A window of `length` consecutive sweeps from one (subject, sequence,
// gesture) run. The frames stay in the store; materialize() copies them out.
struct SweepWindow {
  std::uint64_t start_index = 0;
  std::uint32_t length = kWindowLength;
  int label = 0;
  std::uint32_t subject_id = 0;
  std::uint32_t sequence_id = 0;

  std::uint64_t end_index() const { return start_index + length; }  // exclusive

  friend bool operator==(const SweepWindow&, const SweepWindow&) = default;
};

// Windows per contiguous run of L frames: floor((L - t) / stride) + 1, or 0
// when L < t.
inline std::size_t window_count(std::size_t run_length, std::size_t t, std::size_t stride) {
  if (run_length < t) return 0;
  return (run_length - t) / stride + 1;
}

// Sliding windows that never straddle a change of subject, sequence or
// gesture.
inline std::vector<SweepWindow> window_stream(const sweepgen::FrameStore& frames, std::size_t t = kWindowLength,
                                              std::size_t stride = 1) {
  if (t < 1) throw ConfigError("window length must be >= 1");
  if (stride < 1) throw ConfigError("window stride must be >= 1");
  std::vector<SweepWindow> out;
  std::size_t run_start = 0;
  for (std::size_t i = 1; i <= frames.size(); ++i) {
    if (i < frames.size() && frames.tag(i) == frames.tag(run_start)) continue;
    const auto& tag = frames.tag(run_start);
    const std::size_t n = window_count(i - run_start, t, stride);
    for (std::size_t w = 0; w < n; ++w) {
      out.push_back({run_start + w * stride, static_cast<std::uint32_t>(t), static_cast<int>(tag.gesture_id),
                     tag.subject_id, tag.sequence_id});
    }
    run_start = i;
  }
  return out;
}

// (t, tx, rx) tensor of the window's frames.
inline nn::Tensor<double> materialize(const sweepgen::FrameStore& frames, const SweepWindow& w) {
  nn::Tensor<double> out({w.length, frames.n_tx(), frames.n_rx()});
  for (std::size_t k = 0; k < w.length; ++k) {
    auto src = frames.frame(w.start_index + k);
    std::copy(src.begin(), src.end(), out.ptr() + k * frames.frame_size());
  }
  return out;
}

}  // namespace isac::dataset
