#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "isac/dataset/window.hpp"
#include "isac/error.hpp"

namespace isac::dataset {

struct SplitSpec {
  double train = 0.72;
  double val = 0.08;
  double test = 0.20;

  void validate() const {
    if (train < 0 || val < 0 || test < 0) throw ConfigError("split fractions must be non-negative");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split fractions must sum to 1");
  }
};

enum class SplitName { train, val, test };

inline const char* to_string(SplitName s) {
  switch (s) {
    case SplitName::train: return "train";
    case SplitName::val: return "val";
    case SplitName::test: return "test";
  }
  return "?";
}

struct GroupKey {
  std::uint32_t subject_id;
  int gesture_id;
  auto operator<=>(const GroupKey&) const = default;
};

struct GroupSplit {
  GroupKey key;
  std::size_t assigned_train = 0, assigned_val = 0, assigned_test = 0;
  std::size_t dropped_train = 0, dropped_val = 0;
};

struct SplitResult {
  std::vector<SweepWindow> train, val, test;
  std::vector<GroupSplit> groups;
};

// Splits every (subject, gesture) group in temporal order: the first
// floor(0.72 n) windows train, the next floor(0.08 n) validate, the remainder
// test. Earlier-split windows whose frames overlap any frame of a later split
// are then dropped, so no sweep is seen by two splits. Output is in temporal
// order; callers shuffle afterwards.
inline SplitResult split(const std::vector<SweepWindow>& windows, const SplitSpec& spec = {}) {
  spec.validate();
  std::map<GroupKey, std::vector<SweepWindow>> groups;
  for (const auto& w : windows) groups[{w.subject_id, w.label}].push_back(w);

  SplitResult out;
  for (auto& [key, g] : groups) {
    if (g.size() < 3) {
      throw ConfigError("group (subject " + std::to_string(key.subject_id) + ", gesture " +
                        std::to_string(key.gesture_id) + ") has " + std::to_string(g.size()) +
                        " windows; at least 3 are needed to split");
    }
    std::stable_sort(g.begin(), g.end(), [](const auto& a, const auto& b) { return a.start_index < b.start_index; });
    const std::size_t n = g.size();
    const auto n_train = static_cast<std::size_t>(std::floor(spec.train * static_cast<double>(n) + 1e-9));
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val * static_cast<double>(n) + 1e-9));
    GroupSplit gs{key, n_train, n_val, n - n_train - n_val};

    // Earliest frame used by any later split.
    const std::uint64_t val_floor = n_train < n ? g[n_train].start_index : UINT64_MAX;
    const std::uint64_t test_floor = n_train + n_val < n ? g[n_train + n_val].start_index : UINT64_MAX;
    const std::uint64_t after_train = std::min(val_floor, test_floor);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& w = g[i];
      if (i < n_train) {
        if (w.end_index() > after_train) {
          ++gs.dropped_train;
        } else {
          out.train.push_back(w);
        }
      } else if (i < n_train + n_val) {
        if (w.end_index() > test_floor) {
          ++gs.dropped_val;
        } else {
          out.val.push_back(w);
        }
      } else {
        out.test.push_back(w);
      }
    }
    out.groups.push_back(gs);
  }
  return out;
}

// Line-oriented audit of the split: one line per (group, split) with the
// frame range it covers, "subject gesture split first_frame end_frame count".
inline void write_split_manifest(std::ostream& os, const SplitResult& r) {
  struct Range {
    std::uint64_t first = UINT64_MAX, end = 0;
    std::size_t count = 0;
  };
  std::map<std::pair<GroupKey, int>, Range> ranges;
  auto add = [&](const std::vector<SweepWindow>& ws, SplitName s) {
    for (const auto& w : ws) {
      auto& r = ranges[{{w.subject_id, w.label}, static_cast<int>(s)}];
      r.first = std::min(r.first, w.start_index);
      r.end = std::max(r.end, w.end_index());
      ++r.count;
    }
  };
  add(r.train, SplitName::train);
  add(r.val, SplitName::val);
  add(r.test, SplitName::test);
  os << "# subject gesture split first_frame end_frame count\n";
  for (const auto& [k, range] : ranges) {
    os << k.first.subject_id << ' ' << k.first.gesture_id << ' ' << to_string(static_cast<SplitName>(k.second)) << ' '
       << range.first << ' ' << range.end << ' ' << range.count << '\n';
  }
}

}  // namespace isac::dataset
