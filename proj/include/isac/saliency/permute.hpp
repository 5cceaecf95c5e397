#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "isac/error.hpp"
#include "isac/sweepgen/frames.hpp"

namespace isac::saliency {

// New beam index i holds what was measured on old index tx[i] (resp. rx[i]).
struct BeamPermutation {
  std::vector<std::size_t> tx;
  std::vector<std::size_t> rx;

  static BeamPermutation identity(std::size_t n_tx, std::size_t n_rx) {
    BeamPermutation p{std::vector<std::size_t>(n_tx), std::vector<std::size_t>(n_rx)};
    std::iota(p.tx.begin(), p.tx.end(), std::size_t{0});
    std::iota(p.rx.begin(), p.rx.end(), std::size_t{0});
    return p;
  }

  static BeamPermutation random(std::size_t n_tx, std::size_t n_rx, std::uint64_t seed) {
    auto p = identity(n_tx, n_rx);
    std::mt19937_64 rng(seed);
    std::shuffle(p.tx.begin(), p.tx.end(), rng);
    std::shuffle(p.rx.begin(), p.rx.end(), rng);
    return p;
  }

  BeamPermutation inverse() const {
    BeamPermutation inv{std::vector<std::size_t>(tx.size()), std::vector<std::size_t>(rx.size())};
    for (std::size_t i = 0; i < tx.size(); ++i) inv.tx[tx[i]] = i;
    for (std::size_t i = 0; i < rx.size(); ++i) inv.rx[rx[i]] = i;
    return inv;
  }

  void validate(std::size_t n_tx, std::size_t n_rx) const {
    auto bijective = [](const std::vector<std::size_t>& p, std::size_t n) {
      if (p.size() != n) return false;
      std::vector<char> seen(n, 0);
      for (auto v : p) {
        if (v >= n || seen[v]) return false;
        seen[v] = 1;
      }
      return true;
    };
    if (!bijective(tx, n_tx) || !bijective(rx, n_rx)) throw InputError("beam permutation is not a bijection");
  }
};

// Reassigns beam indices consistently across every frame of the dataset.
inline sweepgen::FrameStore permute_beams(const sweepgen::FrameStore& frames, const BeamPermutation& perm) {
  perm.validate(frames.n_tx(), frames.n_rx());
  sweepgen::FrameStore out(frames.n_tx(), frames.n_rx());
  out.reserve(frames.size());
  std::vector<float> buf(frames.frame_size());
  const std::size_t n_rx = frames.n_rx();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const auto src = frames.frame(f);
    for (std::size_t i = 0; i < frames.n_tx(); ++i) {
      for (std::size_t j = 0; j < n_rx; ++j) buf[i * n_rx + j] = src[perm.tx[i] * n_rx + perm.rx[j]];
    }
    out.push_back(buf, frames.tag(f));
  }
  return out;
}

inline sweepgen::FrameStore permute_beams(const sweepgen::FrameStore& frames, std::uint64_t seed) {
  return permute_beams(frames, BeamPermutation::random(frames.n_tx(), frames.n_rx(), seed));
}

}  // namespace isac::saliency
