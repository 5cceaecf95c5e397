#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "isac/airtime/resample.hpp"
#include "isac/classifier/train.hpp"
#include "isac/dataset/window.hpp"
#include "isac/error.hpp"
#include "isac/sweepgen/frames.hpp"

namespace isac::harness {

// (x - mean) / stddev applied to every dB cell.
struct Normalization {
  double mean = 0.0;
  double stddev = 1.0;
};

// Statistics over every frame covered by at least one of `windows`, each
// frame counted once. Pass the training windows only.
inline Normalization fit_normalization(const sweepgen::FrameStore& frames, std::span<const dataset::SweepWindow> windows) {
  std::vector<char> used(frames.size(), 0);
  for (const auto& w : windows) {
    if (w.end_index() > frames.size()) throw InputError("window extends past the frame store");
    std::fill(used.begin() + static_cast<std::ptrdiff_t>(w.start_index),
              used.begin() + static_cast<std::ptrdiff_t>(w.end_index()), 1);
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!used[f]) continue;
    for (float v : frames.frame(f)) sum += v;
    n += frames.frame_size();
  }
  if (n == 0) throw ConfigError("no frames to fit normalization on");
  const double mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    if (!used[f]) continue;
    for (float v : frames.frame(f)) sq += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(sq / static_cast<double>(n));
  return {mean, sd > 0.0 ? sd : 1.0};
}

// Windows of a frame store as seen by the classifier after the airtime
// variant: subsample then upsample, done as one gather, then normalized.
class VariantSource final : public classifier::WindowSource {
 public:
  VariantSource(const sweepgen::FrameStore& frames, std::vector<dataset::SweepWindow> windows,
                const airtime::SubsamplePlan& plan, Normalization norm,
                airtime::Upsampling kind = airtime::Upsampling::repeat)
      : frames_(frames), windows_(std::move(windows)), norm_(norm) {
    if (frames.n_tx() != classifier::kTxBeams || frames.n_rx() != classifier::kRxBeams) {
      throw ShapeError("frame store must hold 50x56 sweeps");
    }
    for (std::size_t a = 0; a < 3; ++a) {
      if (plan.axes[a].length != airtime::kAxisLengths[a]) throw ShapeError("plan axis lengths must be (20,50,56)");
      maps_[a] = airtime::source_index_map(plan, a, kind);
    }
    for (const auto& w : windows_) {
      if (w.length != classifier::kWindow) throw ShapeError("windows must span 20 sweeps");
      if (w.end_index() > frames.size()) throw InputError("window extends past the frame store");
    }
  }

  std::size_t size() const override { return windows_.size(); }
  int label(std::size_t i) const override { return windows_[i].label; }

  void fill(std::size_t i, std::span<double> out) const override {
    const auto& w = windows_[i];
    const double scale = 1.0 / norm_.stddev;
    const std::size_t rx = classifier::kRxBeams;
    double* dst = out.data();
    for (auto t : maps_[0]) {
      const float* frame = frames_.frame(w.start_index + t).data();
      for (auto j : maps_[1]) {
        const float* row = frame + j * rx;
        for (auto k : maps_[2]) *dst++ = (static_cast<double>(row[k]) - norm_.mean) * scale;
      }
    }
  }

  const std::vector<dataset::SweepWindow>& windows() const { return windows_; }

 private:
  const sweepgen::FrameStore& frames_;
  std::vector<dataset::SweepWindow> windows_;
  std::array<std::vector<std::size_t>, 3> maps_;
  Normalization norm_;
};

}  // namespace isac::harness
