#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "isac/error.hpp"
#include "isac/nn/tensor.hpp"

namespace isac::airtime {

using Rational = boost::rational<std::int64_t>;

inline std::string format_rational(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

inline Rational parse_rational(const std::string& s) {
  const auto slash = s.find('/');
  try {
    if (slash == std::string::npos) return Rational(std::stoll(s));
    return Rational(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
  } catch (const std::exception&) {
    throw InputError("not a rational: '" + s + "'");
  }
}

// Achieved factor when keeping every s-th of d indices starting at 0:
// d / ceil(d / s). Equals s exactly when s divides d.
inline Rational actual_factor(std::int64_t d, std::int64_t s) {
  if (d < 1 || s < 1) throw InputError("actual_factor needs d >= 1 and s >= 1");
  return Rational(d, (d + s - 1) / s);
}

enum class SubsampleMode { none, time, tx, rx, txrx };

inline const char* to_string(SubsampleMode m) {
  switch (m) {
    case SubsampleMode::none: return "none";
    case SubsampleMode::time: return "time";
    case SubsampleMode::tx: return "tx";
    case SubsampleMode::rx: return "rx";
    case SubsampleMode::txrx: return "txrx";
  }
  return "?";
}

inline SubsampleMode parse_mode(const std::string& s) {
  for (auto m : {SubsampleMode::none, SubsampleMode::time, SubsampleMode::tx, SubsampleMode::rx, SubsampleMode::txrx}) {
    if (s == to_string(m)) return m;
  }
  throw InputError("unknown subsampling mode '" + s + "' (none|time|tx|rx|txrx)");
}

enum Axis : std::size_t { kTime = 0, kTx = 1, kRx = 2 };
inline constexpr std::array<std::size_t, 3> kAxisLengths{20, 50, 56};

struct AxisPlan {
  std::size_t length = 1;
  std::size_t factor = 1;
  std::vector<std::size_t> kept;  // {0, f, 2f, ...} below length
};

inline AxisPlan make_axis(std::size_t length, std::size_t factor) {
  AxisPlan a{length, factor, {}};
  for (std::size_t i = 0; i < length; i += factor) a.kept.push_back(i);
  return a;
}

struct SubsamplePlan {
  SubsampleMode mode = SubsampleMode::none;
  int target_factor = 1;
  std::array<AxisPlan, 3> axes;
  Rational actual_factor{1};

  std::array<std::size_t, 3> reduced_dims() const {
    return {axes[0].kept.size(), axes[1].kept.size(), axes[2].kept.size()};
  }

  // e.g. "mode=txrx s=9 s'=2800/323"
  std::string to_string() const {
    return std::string("mode=") + airtime::to_string(mode) + " s=" + std::to_string(target_factor) +
           " s'=" + format_rational(actual_factor);
  }
};

// Single-axis modes keep every s-th index on their axis. txrx splits the
// factor as sqrt(s) on both beam axes and accepts s in {4, 9}. Mode none or
// s = 1 is the identity plan.
inline SubsamplePlan make_plan(SubsampleMode mode, int s, const std::array<std::size_t, 3>& dims = kAxisLengths) {
  if (s < 1) throw InputError("subsampling factor must be >= 1, got " + std::to_string(s));
  std::array<std::size_t, 3> f{1, 1, 1};
  if (s > 1) {
    switch (mode) {
      case SubsampleMode::none:
        throw InputError("mode none takes no subsampling factor other than 1");
      case SubsampleMode::time: f[kTime] = static_cast<std::size_t>(s); break;
      case SubsampleMode::tx: f[kTx] = static_cast<std::size_t>(s); break;
      case SubsampleMode::rx: f[kRx] = static_cast<std::size_t>(s); break;
      case SubsampleMode::txrx: {
        const int root = static_cast<int>(std::lround(std::sqrt(static_cast<double>(s))));
        if (root * root != s) throw InputError("txrx subsampling needs a perfect-square factor, got " + std::to_string(s));
        if (s != 4 && s != 9) throw InputError("txrx subsampling supports s in {4, 9}, got " + std::to_string(s));
        f[kTx] = f[kRx] = static_cast<std::size_t>(root);
        break;
      }
    }
  }
  SubsamplePlan plan;
  plan.mode = mode;
  plan.target_factor = s;
  for (std::size_t a = 0; a < 3; ++a) {
    plan.axes[a] = make_axis(dims[a], f[a]);
    if (f[a] > 1) {
      plan.actual_factor *= airtime::actual_factor(static_cast<std::int64_t>(dims[a]), static_cast<std::int64_t>(f[a]));
    }
  }
  return plan;
}

struct AirtimeReport {
  Rational sensing_fraction;
  Rational comms_fraction;
};

// Sensing takes 1/s' of the airtime, communications the rest.
inline AirtimeReport airtime_report(const SubsamplePlan& plan) {
  const Rational sensing = Rational(1) / plan.actual_factor;
  return {sensing, Rational(1) - sensing};
}

}  // namespace isac::airtime
