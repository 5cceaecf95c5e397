#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isac/error.hpp"
#include "isac/sweepgen/array.hpp"

namespace isac::sweepgen {

// One full beam sweep: power per (tx beam, rx beam) in dB, row-major.
struct SweepFrame {
  std::vector<double> power;
  std::uint64_t sweep_index = 0;
  std::uint32_t subject_id = 0;
  std::uint32_t sequence_id = 0;
  std::uint32_t gesture_id = 0;
};

struct FrameTag {
  std::uint32_t subject_id = 0;
  std::uint32_t sequence_id = 0;
  std::uint32_t gesture_id = 0;

  friend bool operator==(const FrameTag&, const FrameTag&) = default;
};

// Ordered frame stream held as 32-bit floats. A frame's sweep index is its
// position in the store.
class FrameStore {
 public:
  FrameStore(std::size_t n_tx = kTxBeams, std::size_t n_rx = kRxBeams) : n_tx_(n_tx), n_rx_(n_rx) {}

  std::size_t n_tx() const { return n_tx_; }
  std::size_t n_rx() const { return n_rx_; }
  std::size_t frame_size() const { return n_tx_ * n_rx_; }
  std::size_t size() const { return tags_.size(); }

  void reserve(std::size_t frames) {
    power_.reserve(frames * frame_size());
    tags_.reserve(frames);
  }

  void push_back(const SweepFrame& f) {
    if (f.power.size() != frame_size()) throw ShapeError("frame does not have n_tx*n_rx cells");
    for (double v : f.power) power_.push_back(static_cast<float>(v));
    tags_.push_back({f.subject_id, f.sequence_id, f.gesture_id});
  }

  void push_back(std::span<const float> power, FrameTag tag) {
    if (power.size() != frame_size()) throw ShapeError("frame does not have n_tx*n_rx cells");
    power_.insert(power_.end(), power.begin(), power.end());
    tags_.push_back(tag);
  }

  std::span<const float> frame(std::size_t i) const {
    return std::span<const float>(power_).subspan(i * frame_size(), frame_size());
  }
  std::span<float> frame(std::size_t i) { return std::span<float>(power_).subspan(i * frame_size(), frame_size()); }
  const FrameTag& tag(std::size_t i) const { return tags_.at(i); }

  std::span<const float> raw() const { return power_; }
  const std::vector<FrameTag>& tags() const { return tags_; }

  friend bool operator==(const FrameStore&, const FrameStore&) = default;

 private:
  std::size_t n_tx_;
  std::size_t n_rx_;
  std::vector<float> power_;
  std::vector<FrameTag> tags_;
};

}  // namespace isac::sweepgen
