#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "isac/airtime/plan.hpp"
#include "isac/classifier/train.hpp"
#include "isac/error.hpp"
#include "isac/sweepgen/array.hpp"
#include "isac/sweepgen/scene.hpp"

namespace isac::harness {

struct GridEntry {
  airtime::SubsampleMode mode = airtime::SubsampleMode::none;
  int s = 1;

  std::string key() const { return std::string(airtime::to_string(mode)) + "-" + std::to_string(s); }
  airtime::SubsamplePlan plan() const { return airtime::make_plan(mode, s); }
  friend bool operator==(const GridEntry&, const GridEntry&) = default;
};

// Baseline, s = 2..9 on each single axis, and txrx at 4 and 9.
inline std::vector<GridEntry> default_grid() {
  using airtime::SubsampleMode;
  std::vector<GridEntry> grid{{SubsampleMode::none, 1}};
  for (auto m : {SubsampleMode::time, SubsampleMode::tx, SubsampleMode::rx}) {
    for (int s = 2; s <= 9; ++s) grid.push_back({m, s});
  }
  grid.push_back({SubsampleMode::txrx, 4});
  grid.push_back({SubsampleMode::txrx, 9});
  return grid;
}

inline GridEntry parse_entry(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw ConfigError("grid entry '" + text + "' is not mode:s");
  GridEntry e;
  e.mode = airtime::parse_mode(text.substr(0, colon));
  try {
    e.s = std::stoi(text.substr(colon + 1));
  } catch (const std::exception&) {
    throw ConfigError("grid entry '" + text + "' has a non-integer factor");
  }
  e.plan();  // rejects invalid combinations
  return e;
}

struct ExperimentConfig {
  sweepgen::SceneConfig scene;
  sweepgen::SweepTiming timing;
  std::string dataset_path;  // empty: synthesize from the scene section
  std::size_t window_stride = 1;
  classifier::TrainConfig train;
  std::vector<GridEntry> grid = default_grid();
  std::string out_dir = "isac_out";
  std::uint64_t master_seed = 1;
  GridEntry tiled_ablation{airtime::SubsampleMode::txrx, 4};
  std::size_t saliency_samples = 1000;

  void validate() const {
    timing.validate(sweepgen::ArrayConfig{});
    train.validate();
    if (window_stride < 1) throw ConfigError("window stride must be >= 1");
    if (grid.empty()) throw ConfigError("grid is empty");
    for (const auto& e : grid) e.plan();
    tiled_ablation.plan();
    if (scene.subjects < 1 || scene.sequences < 1) throw ConfigError("subjects and sequences must be >= 1");
  }
};

// Paper-scale defaults with the desk-scale session (2 subjects x 2 sequences).
inline void apply_desk_scale(ExperimentConfig& c) {
  c.scene.subjects = 2;
  c.scene.sequences = 2;
}

namespace detail {

struct Field {
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

inline std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  std::istringstream is(v);
  T out{};
  if (!(is >> out) || !(is >> std::ws).eof()) throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

// Ordered (section, key) -> accessor table; drives parsing and --dump-config.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto num = [&t](const std::string& name, auto member) {
      using V = std::remove_reference_t<decltype(std::declval<C&>().*member)>;
      t.push_back({name, {[member](const C& c) {
                            if constexpr (std::is_floating_point_v<V>) {
                              return fmt_double(c.*member);
                            } else {
                              return std::to_string(c.*member);
                            }
                          },
                          [member, name](C& c, const std::string& v) { c.*member = parse_number<V>(name, v); }}});
    };
    auto nested = [&t](const std::string& name, auto get_ref) {
      using V = std::remove_reference_t<decltype(get_ref(std::declval<C&>()))>;
      t.push_back({name, {[get_ref](const C& c) {
                            auto& cc = const_cast<C&>(c);
                            if constexpr (std::is_floating_point_v<V>) {
                              return fmt_double(get_ref(cc));
                            } else {
                              return std::to_string(get_ref(cc));
                            }
                          },
                          [get_ref, name](C& c, const std::string& v) { get_ref(c) = parse_number<V>(name, v); }}});
    };
    nested("scene.subjects", [](C& c) -> std::size_t& { return c.scene.subjects; });
    nested("scene.sequences", [](C& c) -> std::size_t& { return c.scene.sequences; });
    nested("scene.seconds_per_gesture", [](C& c) -> double& { return c.scene.seconds_per_gesture; });
    nested("scene.noise_std_db", [](C& c) -> double& { return c.scene.noise_std_db; });
    nested("scene.lateral_squeeze", [](C& c) -> double& { return c.scene.lateral_squeeze; });
    nested("scene.seed", [](C& c) -> std::uint64_t& { return c.scene.seed; });
    nested("timing.dwell_per_pair", [](C& c) -> double& { return c.timing.dwell_per_pair; });
    nested("timing.pairs_per_sweep", [](C& c) -> std::size_t& { return c.timing.pairs_per_sweep; });
    nested("timing.sweeps_per_second", [](C& c) -> double& { return c.timing.sweeps_per_second; });
    nested("timing.symbols_per_dwell", [](C& c) -> int& { return c.timing.symbols_per_dwell; });
    t.push_back({"dataset.path", {[](const C& c) { return c.dataset_path; },
                                  [](C& c, const std::string& v) { c.dataset_path = v; }}});
    num("dataset.window_stride", &C::window_stride);
    nested("train.epochs", [](C& c) -> int& { return c.train.epochs; });
    nested("train.learning_rate", [](C& c) -> double& { return c.train.learning_rate; });
    nested("train.batch_size", [](C& c) -> std::size_t& { return c.train.batch_size; });
    nested("train.repeats", [](C& c) -> int& { return c.train.repeats; });
    nested("train.eval_batch_size", [](C& c) -> std::size_t& { return c.train.eval_batch_size; });
    t.push_back({"grid.entries", {[](const C& c) {
                                    std::string s;
                                    for (const auto& e : c.grid) {
                                      if (!s.empty()) s += ' ';
                                      s += std::string(airtime::to_string(e.mode)) + ":" + std::to_string(e.s);
                                    }
                                    return s;
                                  },
                                  [](C& c, const std::string& v) {
                                    c.grid.clear();
                                    std::istringstream is(v);
                                    for (std::string tok; is >> tok;) c.grid.push_back(parse_entry(tok));
                                  }}});
    t.push_back({"run.out_dir", {[](const C& c) { return c.out_dir; }, [](C& c, const std::string& v) { c.out_dir = v; }}});
    num("run.master_seed", &C::master_seed);
    t.push_back({"ablation.tiled", {[](const C& c) {
                                      return std::string(airtime::to_string(c.tiled_ablation.mode)) + ":" +
                                             std::to_string(c.tiled_ablation.s);
                                    },
                                    [](C& c, const std::string& v) { c.tiled_ablation = parse_entry(v); }}});
    num("saliency.samples", &C::saliency_samples);
    return t;
  }();
  return table;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Sectioned key = value text. Every known key is printed, in a stable order.
inline std::string dump_config(const ExperimentConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& [name, field] : detail::fields()) {
    const auto dot = name.find('.');
    const auto sec = name.substr(0, dot);
    if (sec != section) {
      if (!section.empty()) os << '\n';
      os << '[' << sec << "]\n";
      section = sec;
    }
    os << name.substr(dot + 1) << " = " << field.get(c) << '\n';
  }
  return os.str();
}

// Overlays the text onto `base`. Timing consistency is checked here, so a
// config with mismatched dwell and sweep rate never loads.
inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {}) {
  std::map<std::string, const detail::Field*> index;
  for (const auto& [name, field] : detail::fields()) index[name] = &field;
  std::string section, line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(lineno, "unterminated section header");
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    const auto key = section + "." + detail::trim(line.substr(0, eq));
    const auto it = index.find(key);
    if (it == index.end()) throw ParseError(lineno, "unknown key '" + key + "'");
    try {
      it->second->set(base, detail::trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ParseError(lineno, e.what());
    } catch (const InputError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  base.validate();
  return base;
}

inline ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {}) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  return parse_config(is, std::move(base));
}

}  // namespace isac::harness
