#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "isac/airtime/resample.hpp"
#include "isac/classifier/checkpoint.hpp"
#include "isac/classifier/train.hpp"
#include "isac/dataset/io.hpp"
#include "isac/dataset/split.hpp"
#include "isac/dataset/window.hpp"
#include "isac/error.hpp"
#include "isac/harness/config.hpp"
#include "isac/harness/data_view.hpp"
#include "isac/harness/results.hpp"
#include "isac/saliency/permute.hpp"
#include "isac/seed.hpp"
#include "isac/sweepgen/scene.hpp"

namespace isac::harness {

namespace fs = std::filesystem;

// Write to a sibling temp file, then rename over the target.
inline void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + tmp.string() + " for writing");
    os << content;
    if (!os) throw IoError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

// Seed of the first repeat of a grid entry; repeat i uses this + i.
inline std::uint64_t entry_seed(std::uint64_t master, const GridEntry& e) {
  return derive_seed(master, {static_cast<std::uint64_t>(e.mode), static_cast<std::uint64_t>(e.s)});
}

struct PreparedData {
  sweepgen::FrameStore frames;
  dataset::SplitResult split;
  Normalization norm;
};

inline sweepgen::FrameStore load_or_generate(const ExperimentConfig& cfg, std::ostream& log) {
  if (!cfg.dataset_path.empty()) {
    log << "dataset load " << cfg.dataset_path << std::endl;
    return dataset::load_dataset(cfg.dataset_path).frames;
  }
  log << "dataset generate subjects=" << cfg.scene.subjects << " sequences=" << cfg.scene.sequences
      << " seconds=" << cfg.scene.seconds_per_gesture << " noise_db=" << cfg.scene.noise_std_db
      << " seed=" << cfg.scene.seed << std::endl;
  return sweepgen::generate_session(cfg.scene, sweepgen::ArrayConfig{}, cfg.timing);
}

// Windows, splits and training-split normalization over a frame store.
inline PreparedData prepare(sweepgen::FrameStore frames, const ExperimentConfig& cfg, std::ostream& log) {
  PreparedData d{std::move(frames), {}, {}};
  const auto windows = dataset::window_stream(d.frames, dataset::kWindowLength, cfg.window_stride);
  d.split = dataset::split(windows, dataset::SplitSpec{});
  d.norm = fit_normalization(d.frames, d.split.train);
  log << "frames " << d.frames.size() << " windows " << windows.size() << " train " << d.split.train.size()
      << " val " << d.split.val.size() << " test " << d.split.test.size() << " norm_mean " << fmt17(d.norm.mean)
      << " norm_std " << fmt17(d.norm.stddev) << std::endl;
  return d;
}

struct VariantSplits {
  VariantSource train, val, test;

  VariantSplits(const PreparedData& d, const airtime::SubsamplePlan& plan, airtime::Upsampling kind)
      : train(d.frames, d.split.train, plan, d.norm, kind),
        val(d.frames, d.split.val, plan, d.norm, kind),
        test(d.frames, d.split.test, plan, d.norm, kind) {}

  classifier::Splits splits() const { return {&train, &val, &test}; }
};

struct EntryResult {
  std::vector<double> accuracies;
  double mu = 0.0;
  double sigma = 0.0;
  int epochs = 0;
};

inline std::string confusion_csv(const classifier::Confusion& c) {
  std::ostringstream os;
  os << "true\\pred";
  for (std::size_t j = 0; j < classifier::kClasses; ++j) os << ',' << j;
  os << '\n';
  for (std::size_t i = 0; i < classifier::kClasses; ++i) {
    os << i;
    for (std::size_t j = 0; j < classifier::kClasses; ++j) os << ',' << c[i][j];
    os << '\n';
  }
  return os.str();
}

namespace detail {

inline constexpr const char* kCompleteLine = "complete";

// Reads back a finished entry; nullopt when the marker is absent or stale.
inline std::optional<EntryResult> read_summary(const fs::path& path, int repeats, int epochs) {
  std::ifstream is(path);
  if (!is) return std::nullopt;
  EntryResult r;
  std::string line;
  bool complete = false;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "epochs") {
      ls >> r.epochs;
    } else if (tag == "run") {
      int i;
      std::string acc;
      ls >> i >> acc;
      r.accuracies.push_back(std::stod(acc));
    } else if (tag == kCompleteLine) {
      complete = true;
    }
  }
  if (!complete || r.epochs != epochs || static_cast<int>(r.accuracies.size()) != repeats) return std::nullopt;
  std::tie(r.mu, r.sigma) = classifier::mean_stddev(r.accuracies);
  return r;
}

}  // namespace detail

// Trains `repeats` runs of one dataset variant into `dir`, or reuses a
// previous completed run there. The summary file doubles as the completion
// marker and is written last.
inline EntryResult run_variant(const fs::path& dir, const std::string& label, const classifier::Splits& splits,
                               const classifier::TrainConfig& train_cfg, std::ostream& log,
                               bool keep_first_model = false) {
  const fs::path summary = dir / "summary.txt";
  if (auto done = detail::read_summary(summary, train_cfg.repeats, train_cfg.epochs)) {
    log << "entry " << label << " resume mu " << fmt17(done->mu) << " sigma " << fmt17(done->sigma) << std::endl;
    return *done;
  }
  fs::create_directories(dir);
  std::ostringstream runlog, curves;
  curves << "run,epoch,train_loss,train_accuracy,val_accuracy\n";
  classifier::Confusion total{};
  int current = 0;
  auto on_epoch = [&](int epoch, const classifier::EpochMetrics& m) {
    curves << current << ',' << epoch << ',' << fmt17(m.train_loss) << ',' << fmt17(m.train_accuracy) << ','
           << fmt17(m.val_accuracy) << '\n';
    log << "entry " << label << " run " << current << " epoch " << epoch << " loss " << fmt6(m.train_loss)
        << " train_acc " << fmt6(m.train_accuracy) << " val_acc " << fmt6(m.val_accuracy) << std::endl;
  };
  auto on_run = [&](int i, const classifier::RunMetrics& m, classifier::ClassifierModel<double>& model) {
    runlog << "run " << i << ' ' << fmt17(m.test_accuracy) << " seed " << m.seed << " best_epoch " << m.best_epoch
           << " best_val " << fmt17(m.best_val_accuracy) << '\n';
    write_atomic(dir / ("confusion_run" + std::to_string(i) + ".csv"), confusion_csv(m.confusion));
    for (std::size_t a = 0; a < classifier::kClasses; ++a) {
      for (std::size_t b = 0; b < classifier::kClasses; ++b) total[a][b] += m.confusion[a][b];
    }
    if (keep_first_model && i == 0) classifier::save_checkpoint((dir / "model.ckpt").string(), model);
    log << "entry " << label << " run " << i << " test_acc " << fmt6(m.test_accuracy) << " best_epoch "
        << m.best_epoch << std::endl;
    current = i + 1;
  };
  log << "entry " << label << " start seed " << train_cfg.seed << " repeats " << train_cfg.repeats << " epochs "
      << train_cfg.epochs << std::endl;
  const auto summary_stats = classifier::repeat_experiment(splits, train_cfg, on_run, on_epoch);

  write_atomic(dir / "confusion.csv", confusion_csv(total));
  write_atomic(dir / "epochs.csv", curves.str());
  std::ostringstream out;
  out << "# " << label << '\n'
      << "repeats " << train_cfg.repeats << '\n'
      << "epochs " << train_cfg.epochs << '\n'
      << runlog.str() << "mu " << fmt17(summary_stats.mean) << '\n'
      << "sigma " << fmt17(summary_stats.stddev) << '\n'
      << detail::kCompleteLine << '\n';
  write_atomic(summary, out.str());

  EntryResult r;
  for (const auto& m : summary_stats.runs) r.accuracies.push_back(m.test_accuracy);
  r.mu = summary_stats.mean;
  r.sigma = summary_stats.stddev;
  r.epochs = train_cfg.epochs;
  log << "entry " << label << " done mu " << fmt17(r.mu) << " sigma " << fmt17(r.sigma) << std::endl;
  return r;
}

inline classifier::TrainConfig entry_train_config(const ExperimentConfig& cfg, const GridEntry& e) {
  auto t = cfg.train;
  t.seed = entry_seed(cfg.master_seed, e);
  return t;
}

struct GridOutcome {
  std::vector<ResultRow> rows;
  std::vector<ActualRow> actual;
};

// Every grid entry: subsample, upsample, train x repeats, summarize. Writes
// results.csv (one row per entry) and results_actual.csv (rows pooled by
// (mode, s')). Completed entries found in out_dir are reused.
inline GridOutcome run_grid(const ExperimentConfig& cfg, std::ostream& log, const PreparedData* data = nullptr) {
  cfg.validate();
  const fs::path out(cfg.out_dir);
  fs::create_directories(out);
  write_atomic(out / "config.txt", dump_config(cfg));
  std::optional<PreparedData> owned;
  if (!data) {
    owned.emplace(prepare(load_or_generate(cfg, log), cfg, log));
    data = &*owned;
  }
  {
    std::ostringstream manifest;
    dataset::write_split_manifest(manifest, data->split);
    write_atomic(out / "split_manifest.txt", manifest.str());
  }

  GridOutcome g;
  for (const auto& e : cfg.grid) {
    const auto plan = e.plan();
    log << "plan " << plan.to_string() << std::endl;
    VariantSplits v(*data, plan, airtime::Upsampling::repeat);
    const bool baseline = e.mode == airtime::SubsampleMode::none;
    const auto r = run_variant(out / "entries" / e.key(), plan.to_string(), v.splits(), entry_train_config(cfg, e), log,
                               baseline);
    g.rows.push_back(make_row(plan, r.mu, r.sigma, cfg.train.repeats, cfg.train.epochs));
  }
  g.actual = group_by_actual(g.rows);

  std::ostringstream csv, actual;
  write_results_csv(csv, g.rows);
  write_actual_csv(actual, g.actual);
  write_atomic(out / "results.csv", csv.str());
  write_atomic(out / "results_actual.csv", actual.str());
  log << "grid done rows " << g.rows.size() << " actual_rows " << g.actual.size() << std::endl;
  return g;
}

struct AblationRow {
  std::string name;
  GridEntry entry;
  Rational s_prime{1};
  double mu = 0.0;
  double sigma = 0.0;
  double baseline_mu = 0.0;
  int n_repeats = 0;
  int epochs = 0;
};

inline constexpr const char* kAblationHeader = "ablation,mode,s,s_prime,mu,sigma,baseline_mu,delta_pp,n_repeats,epochs";

// Tiled upsampling, permuted beam indices and doubled epochs, each trained
// with the baseline's seeds on the same dataset and compared with the
// baseline grid entry, which must already be complete.
inline std::vector<AblationRow> run_ablations(const ExperimentConfig& cfg, std::ostream& log,
                                              const PreparedData* data = nullptr) {
  cfg.validate();
  const fs::path out(cfg.out_dir);
  const GridEntry base{airtime::SubsampleMode::none, 1};
  const auto baseline = detail::read_summary(out / "entries" / base.key() / "summary.txt", cfg.train.repeats,
                                             cfg.train.epochs);
  if (!baseline) {
    throw OrderingError("ablations need a completed baseline entry in " + (out / "entries" / base.key()).string() +
                        "; run the grid (at least none:1) first with the same repeats and epochs");
  }
  std::optional<PreparedData> owned;
  if (!data) {
    owned.emplace(prepare(load_or_generate(cfg, log), cfg, log));
    data = &*owned;
  }
  const auto base_train = entry_train_config(cfg, base);
  std::vector<AblationRow> rows;
  auto record = [&](const std::string& name, const GridEntry& e, const EntryResult& r, int epochs) {
    rows.push_back({name, e, e.plan().actual_factor, r.mu, r.sigma, baseline->mu, cfg.train.repeats, epochs});
  };

  {
    const auto plan = cfg.tiled_ablation.plan();
    VariantSplits v(*data, plan, airtime::Upsampling::tiled);
    record("tiled_upsampling", cfg.tiled_ablation,
           run_variant(out / "ablations" / "tiled_upsampling", "tiled " + plan.to_string(), v.splits(), base_train, log),
           base_train.epochs);
  }
  {
    const auto perm = saliency::BeamPermutation::random(data->frames.n_tx(), data->frames.n_rx(),
                                                        derive_seed(cfg.master_seed, {0x7065726d}));
    auto permuted = prepare(saliency::permute_beams(data->frames, perm), cfg, log);
    VariantSplits v(permuted, base.plan(), airtime::Upsampling::repeat);
    record("beam_permutation", base,
           run_variant(out / "ablations" / "beam_permutation", "permuted " + base.plan().to_string(), v.splits(),
                       base_train, log),
           base_train.epochs);
  }
  {
    auto doubled = base_train;
    doubled.epochs *= 2;
    VariantSplits v(*data, base.plan(), airtime::Upsampling::repeat);
    record("double_epochs", base,
           run_variant(out / "ablations" / "double_epochs", "epochs x2 " + base.plan().to_string(), v.splits(), doubled,
                       log),
           doubled.epochs);
  }

  std::ostringstream csv;
  csv << kAblationHeader << '\n';
  for (const auto& r : rows) {
    csv << r.name << ',' << airtime::to_string(r.entry.mode) << ',' << r.entry.s << ','
        << airtime::format_rational(r.s_prime) << ',' << fmt17(r.mu) << ',' << fmt17(r.sigma) << ','
        << fmt17(r.baseline_mu) << ',' << fmt6(100.0 * (r.mu - r.baseline_mu)) << ',' << r.n_repeats << ','
        << r.epochs << '\n';
  }
  write_atomic(out / "ablations.csv", csv.str());
  log << "ablations done rows " << rows.size() << std::endl;
  return rows;
}

}  // namespace isac::harness
