#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace isac::nn {

// One differentiable quantity to probe: its live storage (perturbed in
// place) and the analytic gradient computed beforehand.
template <class T>
struct GradProbe {
  std::string name;
  std::span<T> values;
  std::span<const T> analytic;
};

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_probe;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates_checked = 0;
  // Coordinates whose +/-h stencil changed the activation pattern.
  std::size_t kink_skips = 0;
};

// |a - n| / max(|a|, |n|, 1e-12)
inline double relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-12});
}

struct NoSignature {
  std::uint64_t operator()() const { return 0; }
};

struct GradCheckOptions {
  double perturbation = 1e-5;
  // 0 checks every coordinate; otherwise a seeded sample per probe.
  std::size_t max_per_probe = 0;
  std::uint64_t seed = 0;
};

// Compares analytic gradients against central differences
//   (f(x + h) - f(x - h)) / ((x + h) - (x - h))
// of `objective`, a callable re-evaluating the scalar output from the current
// probe storage. When `signature` is given it is read after every objective
// evaluation; a coordinate whose perturbed evaluations disagree with the
// unperturbed signature straddles a relu/maxpool kink and is skipped rather
// than compared. Values are restored bit-exactly.
template <class T, class Objective, class Signature = NoSignature>
GradCheckReport grad_check(const std::vector<GradProbe<T>>& probes, Objective&& objective,
                           const GradCheckOptions& options, Signature signature = {}) {
  GradCheckReport report;
  std::mt19937_64 rng(options.seed);
  objective();
  const std::uint64_t base_sig = signature();
  for (const auto& probe : probes) {
    std::vector<std::size_t> idx(probe.values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (options.max_per_probe > 0 && idx.size() > options.max_per_probe) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.max_per_probe);
      std::sort(idx.begin(), idx.end());
    }
    for (auto i : idx) {
      const T saved = probe.values[i];
      const T hi = saved + static_cast<T>(options.perturbation);
      const T lo = saved - static_cast<T>(options.perturbation);
      probe.values[i] = hi;
      const long double up = static_cast<long double>(objective());
      const bool up_same = signature() == base_sig;
      probe.values[i] = lo;
      const long double down = static_cast<long double>(objective());
      const bool down_same = signature() == base_sig;
      probe.values[i] = saved;
      if (!up_same || !down_same) {
        ++report.kink_skips;
        continue;
      }
      const long double step = static_cast<long double>(hi) - static_cast<long double>(lo);
      const double numeric = static_cast<double>((up - down) / step);
      const double analytic = static_cast<double>(probe.analytic[i]);
      const double err = relative_error(analytic, numeric);
      ++report.coordinates_checked;
      if (err > report.max_relative_error) {
        report.max_relative_error = err;
        report.worst_probe = probe.name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

template <class T, class Objective>
GradCheckReport grad_check(const std::vector<GradProbe<T>>& probes, Objective&& objective, double perturbation) {
  return grad_check(probes, std::forward<Objective>(objective), GradCheckOptions{perturbation, 0, 0});
}

}  // namespace isac::nn
