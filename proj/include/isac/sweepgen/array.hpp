#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "isac/error.hpp"

namespace isac::sweepgen {

inline constexpr std::size_t kTxBeams = 50;
inline constexpr std::size_t kRxBeams = 56;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// n angles evenly spanning [lo, hi] degrees.
inline std::vector<double> linear_codebook(std::size_t n, double lo_deg = -60.0, double hi_deg = 60.0) {
  if (n < 2) throw ConfigError("codebook needs at least 2 beams");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo_deg + (hi_deg - lo_deg) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

enum class Side { tx, rx };

// Two side-by-side uniform linear arrays with broadside along +y.
struct ArrayConfig {
  std::size_t n_tx_beams = kTxBeams;
  std::size_t n_rx_beams = kRxBeams;
  std::size_t elements_per_array = 16;
  double carrier_wavelength = 0.005;  // 60 GHz
  double element_spacing = 0.0025;    // half wavelength
  double tx_position_x = -0.05;
  double rx_position_x = 0.05;
  std::vector<double> tx_codebook = linear_codebook(kTxBeams);
  std::vector<double> rx_codebook = linear_codebook(kRxBeams);

  const std::vector<double>& codebook(Side side) const { return side == Side::tx ? tx_codebook : rx_codebook; }
  double position_x(Side side) const { return side == Side::tx ? tx_position_x : rx_position_x; }

  void validate() const {
    if (tx_codebook.size() != n_tx_beams) throw ConfigError("tx codebook length does not match n_tx_beams");
    if (rx_codebook.size() != n_rx_beams) throw ConfigError("rx codebook length does not match n_rx_beams");
    for (const auto* cb : {&tx_codebook, &rx_codebook}) {
      for (std::size_t i = 1; i < cb->size(); ++i) {
        if (!((*cb)[i] > (*cb)[i - 1])) throw ConfigError("codebook angles must be strictly increasing");
      }
    }
    if (elements_per_array < 1) throw ConfigError("array needs at least one element");
  }
};

// Normalized array-factor power |sum_k exp(j k phi)|^2 / N^2 with
// phi = 2 pi (d / lambda) (sin(direction) - sin(steer)); 1 at the steered angle.
inline double beam_gain(const ArrayConfig& cfg, Side side, std::size_t beam, double direction_deg) {
  const auto& cb = cfg.codebook(side);
  if (beam >= cb.size()) {
    throw InputError("beam index " + std::to_string(beam) + " outside codebook of " + std::to_string(cb.size()));
  }
  const double phi = 2.0 * std::numbers::pi * cfg.element_spacing / cfg.carrier_wavelength *
                     (std::sin(deg2rad(direction_deg)) - std::sin(deg2rad(cb[beam])));
  std::complex<double> sum{0.0, 0.0};
  for (std::size_t k = 0; k < cfg.elements_per_array; ++k) sum += std::polar(1.0, phi * static_cast<double>(k));
  const double n = static_cast<double>(cfg.elements_per_array);
  return std::norm(sum) / (n * n);
}

}  // namespace isac::sweepgen
