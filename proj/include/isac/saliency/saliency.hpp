#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "isac/classifier/train.hpp"
#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::saliency {

using classifier::kRxBeams;
using classifier::kTxBeams;

struct SaliencyMap {
  nn::Tensor<double> values{{kTxBeams, kRxBeams}};
  std::size_t n_samples = 0;
  std::string source_model;  // checkpoint hash
  bool used_all = false;     // fewer test windows than requested
};

// The sorted indices of n windows drawn without replacement, or all of them
// when the set is smaller than n.
inline std::vector<std::size_t> select_samples(std::size_t available, std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> all(available);
  std::iota(all.begin(), all.end(), std::size_t{0});
  if (n >= available) return all;
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n);
  std::sort(all.begin(), all.end());
  return all;
}

// Mean over the selected windows and over the 20 sweeps of
// |d logit_pred / d input|, with batchnorm in eval mode.
inline SaliencyMap compute_saliency(classifier::ClassifierModel<double>& model, const classifier::WindowSource& test,
                                    std::size_t n = 1000, std::uint64_t seed = 0, std::size_t batch_size = 32) {
  SaliencyMap map;
  const auto idx = select_samples(test.size(), n, seed);
  map.used_all = n > test.size();
  map.n_samples = idx.size();
  if (idx.empty()) return map;

  std::vector<int> labels;
  std::vector<double> acc(classifier::kWindowSize, 0.0);
  for (std::size_t start = 0; start < idx.size(); start += batch_size) {
    const std::size_t b = std::min(batch_size, idx.size() - start);
    auto batch = classifier::detail::gather(test, std::span<const std::size_t>(idx).subspan(start, b), labels);
    const auto logits = model.forward(std::move(batch), nn::Mode::eval);
    nn::Tensor<double> seed_grad({b, classifier::kClasses});
    for (std::size_t i = 0; i < b; ++i) {
      const auto row = std::span<const double>(logits.ptr() + i * classifier::kClasses, classifier::kClasses);
      seed_grad.at(i, static_cast<std::size_t>(nn::argmax<double>(row))) = 1.0;
    }
    const auto g = model.backward(seed_grad, true);
    for (std::size_t i = 0; i < b; ++i) {
      const double* gi = g.ptr() + i * classifier::kWindowSize;
      for (std::size_t k = 0; k < classifier::kWindowSize; ++k) acc[k] += std::abs(gi[k]);
    }
  }
  const double denom = static_cast<double>(idx.size() * classifier::kWindow);
  const std::size_t plane = kTxBeams * kRxBeams;
  for (std::size_t c = 0; c < plane; ++c) {
    double s = 0.0;
    for (std::size_t t = 0; t < classifier::kWindow; ++t) s += acc[t * plane + c];
    map.values[c] = s / denom;
  }
  return map;
}

// Fraction of total mass lying over beams [n/4, 3n/4) on one axis. Beams
// cut by an edge contribute the covered share of their mass.
inline double central_half_fraction(const SaliencyMap& map, bool tx_axis) {
  const std::size_t n = tx_axis ? kTxBeams : kRxBeams;
  const double lo = static_cast<double>(n) / 4.0, hi = 3.0 * static_cast<double>(n) / 4.0;
  double total = 0.0, inside = 0.0;
  for (std::size_t i = 0; i < kTxBeams; ++i) {
    for (std::size_t j = 0; j < kRxBeams; ++j) {
      const double v = map.values.at(i, j);
      const double b = static_cast<double>(tx_axis ? i : j);
      const double cover = std::clamp(std::min(b + 1.0, hi) - std::max(b, lo), 0.0, 1.0);
      total += v;
      inside += cover * v;
    }
  }
  return total > 0.0 ? inside / total : 0.0;
}

enum class ExportFormat { csv, pgm };

// csv: 50 rows of 56 comma-separated values. pgm: binary P5, min-max scaled
// to 0..255 (a constant map is all zeros).
inline void export_saliency(const SaliencyMap& map, const std::string& path, ExportFormat format) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open " + path + " for writing");
  if (format == ExportFormat::csv) {
    os << std::setprecision(17);
    for (std::size_t i = 0; i < kTxBeams; ++i) {
      for (std::size_t j = 0; j < kRxBeams; ++j) os << (j ? "," : "") << map.values.at(i, j);
      os << '\n';
    }
  } else {
    const auto [mn, mx] = std::minmax_element(map.values.data().begin(), map.values.data().end());
    const double lo = *mn, range = *mx - *mn;
    os << "P5\n" << kRxBeams << ' ' << kTxBeams << "\n255\n";
    for (double v : map.values.data()) {
      const double scaled = range > 0.0 ? (v - lo) / range * 255.0 : 0.0;
      os.put(static_cast<char>(static_cast<unsigned char>(std::lround(scaled))));
    }
  }
  if (!os) throw IoError("write failed for " + path);
}

inline SaliencyMap read_saliency_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  SaliencyMap map;
  std::string line;
  for (std::size_t i = 0; i < kTxBeams; ++i) {
    if (!std::getline(is, line)) throw ParseError(i + 1, "missing saliency row");
    std::size_t pos = 0;
    for (std::size_t j = 0; j < kRxBeams; ++j) {
      std::size_t used = 0;
      try {
        map.values.at(i, j) = std::stod(line.substr(pos), &used);
      } catch (const std::exception&) {
        throw ParseError(i + 1, "bad saliency value in column " + std::to_string(j + 1));
      }
      pos += used + 1;
    }
  }
  return map;
}

}  // namespace isac::saliency
