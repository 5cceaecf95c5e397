#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "isac/airtime/plan.hpp"
#include "isac/error.hpp"

namespace isac::harness {

using airtime::Rational;

struct ResultRow {
  airtime::SubsampleMode mode = airtime::SubsampleMode::none;
  int s = 1;
  Rational s_prime{1};
  Rational sensing_fraction{1};
  Rational comms_fraction{0};
  double mu = 0.0;
  double sigma = 0.0;
  int n_repeats = 0;
  int epochs = 0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

inline ResultRow make_row(const airtime::SubsamplePlan& plan, double mu, double sigma, int n_repeats, int epochs) {
  const auto air = airtime::airtime_report(plan);
  return {plan.mode, plan.target_factor, plan.actual_factor, air.sensing_fraction, air.comms_fraction,
          mu, sigma, n_repeats, epochs};
}

inline constexpr const char* kResultsHeader =
    "mode,s,s_prime,s_prime_decimal,sensing_fraction,comms_fraction,mu,sigma,n_repeats,epochs";

// %.17g round-trips every double, so reading a CSV back reproduces it.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// Fractions are written as exact rationals; s' also as a decimal.
inline std::string to_csv_line(const ResultRow& r) {
  return std::string(airtime::to_string(r.mode)) + "," + std::to_string(r.s) + "," +
         airtime::format_rational(r.s_prime) + "," + fmt6(airtime::to_double(r.s_prime)) + "," +
         airtime::format_rational(r.sensing_fraction) + "," + airtime::format_rational(r.comms_fraction) + "," +
         fmt17(r.mu) + "," + fmt17(r.sigma) + "," + std::to_string(r.n_repeats) + "," + std::to_string(r.epochs);
}

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kResultsHeader << '\n';
  for (const auto& r : rows) os << to_csv_line(r) << '\n';
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline std::vector<ResultRow> read_results_csv(std::istream& is) {
  std::vector<ResultRow> rows;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line)) throw ParseError(1, "empty results file");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kResultsHeader) throw ParseError(lineno, "unexpected header '" + line + "'");
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = detail::split_csv(line);
    if (c.size() != 10) throw ParseError(lineno, "expected 10 columns, found " + std::to_string(c.size()));
    try {
      auto num = [](const std::string& v) {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw InputError("trailing characters in '" + v + "'");
        return d;
      };
      auto integer = [](const std::string& v) {
        std::size_t used = 0;
        const int d = std::stoi(v, &used);
        if (used != v.size()) throw InputError("trailing characters in '" + v + "'");
        return d;
      };
      ResultRow r;
      r.mode = airtime::parse_mode(c[0]);
      r.s = integer(c[1]);
      r.s_prime = airtime::parse_rational(c[2]);
      num(c[3]);
      r.sensing_fraction = airtime::parse_rational(c[4]);
      r.comms_fraction = airtime::parse_rational(c[5]);
      r.mu = num(c[6]);
      r.sigma = num(c[7]);
      r.n_repeats = integer(c[8]);
      r.epochs = integer(c[9]);
      if (!(r.mu >= 0.0 && r.mu <= 1.0) || !(r.sigma >= 0.0)) throw InputError("mu must lie in [0,1] and sigma >= 0");
      rows.push_back(r);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return rows;
}

inline std::vector<ResultRow> read_results_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path);
  return read_results_csv(is);
}

// Rows sharing (mode, s') pooled into one; mu and sigma are those of the
// union of all runs, recovered exactly from the per-row population moments.
struct ActualRow {
  airtime::SubsampleMode mode;
  Rational s_prime;
  std::vector<int> targets;
  double mu = 0.0;
  double sigma = 0.0;
  int n_runs = 0;
};

inline std::vector<ActualRow> group_by_actual(const std::vector<ResultRow>& rows) {
  std::map<std::pair<int, Rational>, std::vector<const ResultRow*>> groups;
  std::vector<std::pair<int, Rational>> order;
  for (const auto& r : rows) {
    const std::pair<int, Rational> key{static_cast<int>(r.mode), r.s_prime};
    auto [it, fresh] = groups.try_emplace(key);
    if (fresh) order.push_back(key);
    it->second.push_back(&r);
  }
  std::vector<ActualRow> out;
  for (const auto& key : order) {
    ActualRow a{static_cast<airtime::SubsampleMode>(key.first), key.second, {}, 0.0, 0.0, 0};
    double sum = 0.0;
    for (const auto* r : groups[key]) {
      a.targets.push_back(r->s);
      a.n_runs += r->n_repeats;
      sum += r->mu * r->n_repeats;
    }
    if (groups[key].size() == 1) {
      a.mu = groups[key][0]->mu;
      a.sigma = groups[key][0]->sigma;
    } else if (a.n_runs > 0) {
      a.mu = sum / a.n_runs;
      // Two-pass form: identical runs pool to exactly zero spread.
      double var = 0.0;
      for (const auto* r : groups[key]) {
        const double d = r->mu - a.mu;
        var += (r->sigma * r->sigma + d * d) * r->n_repeats;
      }
      a.sigma = std::sqrt(var / a.n_runs);
    }
    out.push_back(a);
  }
  return out;
}

inline void write_actual_csv(std::ostream& os, const std::vector<ActualRow>& rows) {
  os << "mode,s_prime,s_prime_decimal,targets,sensing_fraction,comms_fraction,mu,sigma,n_runs\n";
  for (const auto& a : rows) {
    std::string targets;
    for (int t : a.targets) targets += (targets.empty() ? "" : ";") + std::to_string(t);
    const Rational sensing = Rational(1) / a.s_prime;
    os << airtime::to_string(a.mode) << ',' << airtime::format_rational(a.s_prime) << ','
       << fmt6(airtime::to_double(a.s_prime)) << ',' << targets << ',' << airtime::format_rational(sensing) << ','
       << airtime::format_rational(Rational(1) - sensing) << ',' << fmt17(a.mu) << ',' << fmt17(a.sigma) << ','
       << a.n_runs << '\n';
  }
}

}  // namespace isac::harness
