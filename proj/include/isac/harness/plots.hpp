#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "isac/airtime/plan.hpp"
#include "isac/harness/grid.hpp"
#include "isac/harness/results.hpp"

namespace isac::harness {

struct PlotPoint {
  airtime::SubsampleMode mode;
  double x = 0.0;  // before the per-mode offset
  double mu = 0.0;
  double sigma = 0.0;
};

struct PlotSet {
  std::vector<std::string> files;
  std::vector<PlotPoint> target_points;
  std::vector<PlotPoint> actual_points;
  std::vector<std::pair<double, double>> comms_curve;  // (s', 1 - 1/s')
};

// Presentation only: neighbouring modes sit 0.05 apart so error bars at the
// same factor do not overlap.
inline double mode_offset(airtime::SubsampleMode m) {
  switch (m) {
    case airtime::SubsampleMode::none: return 0.0;
    case airtime::SubsampleMode::time: return -0.075;
    case airtime::SubsampleMode::tx: return -0.025;
    case airtime::SubsampleMode::rx: return 0.025;
    case airtime::SubsampleMode::txrx: return 0.075;
  }
  return 0.0;
}

inline const char* mode_color(airtime::SubsampleMode m) {
  switch (m) {
    case airtime::SubsampleMode::none: return "#000000";
    case airtime::SubsampleMode::time: return "#1f77b4";
    case airtime::SubsampleMode::tx: return "#2ca02c";
    case airtime::SubsampleMode::rx: return "#d62728";
    case airtime::SubsampleMode::txrx: return "#9467bd";
  }
  return "#000000";
}

// Communications airtime 1 - 1/s' sampled every 0.25 from 1 to x_max, so
// every integer factor is a vertex.
inline std::vector<std::pair<double, double>> comms_curve(double x_max) {
  std::vector<std::pair<double, double>> pts;
  for (int k = 0; 1.0 + 0.25 * k <= x_max + 1e-12; ++k) {
    const double x = 1.0 + 0.25 * k;
    pts.emplace_back(x, 1.0 - 1.0 / x);
  }
  return pts;
}

namespace detail {

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Frame {
  double width = 720, height = 440, left = 70, right = 70, top = 30, bottom = 55;
  double x0, x1, y0, y1;
  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return top + (y1 - y) / (y1 - y0) * (height - top - bottom); }
  double py_right(double f) const { return top + (1.0 - f) * (height - top - bottom); }
};

inline std::string render(const std::vector<PlotPoint>& pts, const std::string& title, const std::string& xlabel,
                          const std::vector<std::pair<double, double>>* comms) {
  double xmax = 1.0, ymin = 1.0;
  for (const auto& p : pts) {
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.mu - p.sigma);
  }
  Frame f;
  f.x0 = 0.5;
  f.x1 = std::ceil(xmax) + 0.5;
  f.y0 = std::clamp(std::floor(ymin * 10.0) / 10.0, 0.0, 0.9);
  f.y1 = 1.0;

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << f.width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  const double xl = f.px(f.x0), xr = f.px(f.x1), yb = f.py(f.y0), yt = f.py(f.y1);
  os << "<line x1=\"" << xl << "\" y1=\"" << yb << "\" x2=\"" << xr << "\" y2=\"" << yb << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << xl << "\" y1=\"" << yb << "\" x2=\"" << xl << "\" y2=\"" << yt << "\" stroke=\"black\"/>\n";
  for (int k = 1; k <= static_cast<int>(f.x1); ++k) {
    os << "<text x=\"" << num(f.px(k)) << "\" y=\"" << yb + 16 << "\" text-anchor=\"middle\" font-size=\"11\">" << k
       << "</text>\n";
  }
  for (double y = f.y0; y <= f.y1 + 1e-9; y += 0.05) {
    os << "<text x=\"" << xl - 6 << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\" font-size=\"11\">"
       << num(y) << "</text>\n";
  }
  os << "<text x=\"" << f.width / 2 << "\" y=\"" << f.height - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xlabel << "</text>\n";
  os << "<text x=\"16\" y=\"" << f.height / 2 << "\" transform=\"rotate(-90 16 " << f.height / 2
     << ")\" text-anchor=\"middle\" font-size=\"12\">test accuracy</text>\n";

  if (comms) {
    os << "<line x1=\"" << xr << "\" y1=\"" << yb << "\" x2=\"" << xr << "\" y2=\"" << yt
       << "\" stroke=\"#8c564b\"/>\n";
    for (int k = 0; k <= 4; ++k) {
      os << "<text x=\"" << xr + 6 << "\" y=\"" << num(f.py_right(k / 4.0) + 4) << "\" fill=\"#8c564b\" font-size=\"11\">"
         << num(k / 4.0) << "</text>\n";
    }
    os << "<text x=\"" << f.width - 14 << "\" y=\"" << f.height / 2 << "\" transform=\"rotate(90 " << f.width - 14
       << ' ' << f.height / 2 << ")\" text-anchor=\"middle\" fill=\"#8c564b\" font-size=\"12\">communications airtime</text>\n";
    std::string pts_attr, data_attr;
    for (const auto& [x, y] : *comms) {
      if (x > f.x1) break;
      pts_attr += num(f.px(x)) + "," + num(f.py_right(y)) + " ";
      data_attr += num(x) + "," + num(y) + " ";
    }
    os << "<polyline class=\"comms\" fill=\"none\" stroke=\"#8c564b\" stroke-width=\"2\" points=\"" << pts_attr
       << "\" data-points=\"" << data_attr << "\"/>\n";
  }

  for (const auto& p : pts) {
    const double x = f.px(p.x + mode_offset(p.mode));
    const char* color = mode_color(p.mode);
    if (p.sigma > 0.0) {
      const double lo = p.mu - p.sigma, hi = p.mu + p.sigma;
      os << "<line class=\"errorbar\" data-lo=\"" << fmt17(lo) << "\" data-hi=\"" << fmt17(hi) << "\" x1=\"" << num(x)
         << "\" y1=\"" << num(f.py(lo)) << "\" x2=\"" << num(x) << "\" y2=\"" << num(f.py(hi)) << "\" stroke=\""
         << color << "\"/>\n";
    }
    os << "<circle class=\"point\" data-mode=\"" << airtime::to_string(p.mode) << "\" data-x=\"" << num(p.x)
       << "\" data-mu=\"" << fmt17(p.mu) << "\" cx=\"" << num(x) << "\" cy=\"" << num(f.py(p.mu))
       << "\" r=\"3.5\" fill=\"" << color << "\"/>\n";
  }
  double ly = f.top + 10;
  for (auto m : {airtime::SubsampleMode::none, airtime::SubsampleMode::time, airtime::SubsampleMode::tx,
                 airtime::SubsampleMode::rx, airtime::SubsampleMode::txrx}) {
    os << "<circle cx=\"" << xr - 60 << "\" cy=\"" << ly << "\" r=\"3.5\" fill=\"" << mode_color(m) << "\"/>";
    os << "<text x=\"" << xr - 52 << "\" y=\"" << ly + 4 << "\" font-size=\"11\">" << airtime::to_string(m)
       << "</text>\n";
    ly += 15;
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace detail

// accuracy_vs_target.svg and accuracy_vs_actual.svg (with the communications
// airtime curve on a secondary axis) from a results.csv.
inline PlotSet emit_plots(const std::string& results_csv, const std::string& out_dir) {
  const auto rows = read_results_csv(results_csv);
  PlotSet set;
  double xmax = 1.0;
  for (const auto& r : rows) set.target_points.push_back({r.mode, static_cast<double>(r.s), r.mu, r.sigma});
  for (const auto& a : group_by_actual(rows)) {
    set.actual_points.push_back({a.mode, airtime::to_double(a.s_prime), a.mu, a.sigma});
    xmax = std::max(xmax, airtime::to_double(a.s_prime));
  }
  set.comms_curve = comms_curve(std::max(std::ceil(xmax) + 0.5, 4.0));
  const fs::path out(out_dir);
  const auto target = out / "accuracy_vs_target.svg";
  const auto actual = out / "accuracy_vs_actual.svg";
  write_atomic(target, detail::render(set.target_points, "accuracy vs target subsampling factor",
                                      "target subsampling factor s", nullptr));
  write_atomic(actual, detail::render(set.actual_points, "accuracy vs actual subsampling factor",
                                      "actual subsampling factor s'", &set.comms_curve));
  set.files = {target.string(), actual.string()};
  return set;
}

}  // namespace isac::harness
