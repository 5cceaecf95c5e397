// isac_lab: synthesize sweep datasets, train the gesture classifier under
// reduced sensing airtime, and render the result tables.

#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isac/alloc.hpp"
#include "isac/classifier/checkpoint.hpp"
#include "isac/dataset/io.hpp"
#include "isac/harness/config.hpp"
#include "isac/harness/grid.hpp"
#include "isac/harness/plots.hpp"
#include "isac/saliency/saliency.hpp"
#include "isac/sweepgen/scene.hpp"

namespace fs = std::filesystem;
using namespace isac;

namespace {

struct Overrides {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string out;
  int epochs = 0;
  int repeats = 0;
  std::string mode = "none";
  int factor = 1;
  bool desk_scale = false;
};

harness::ExperimentConfig resolve(const Overrides& o, const CLI::App& app) {
  harness::ExperimentConfig base;
  if (o.desk_scale) harness::apply_desk_scale(base);
  auto cfg = o.config_path.empty() ? base : harness::load_config(o.config_path, base);
  if (app.count("--seed")) cfg.master_seed = o.seed;
  if (app.count("--out")) cfg.out_dir = o.out;
  if (app.count("--epochs")) cfg.train.epochs = o.epochs;
  if (app.count("--repeats")) cfg.train.repeats = o.repeats;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  tune_allocator();
  CLI::App app{"ISAC sensing-airtime lab"};
  app.require_subcommand(0, 1);
  Overrides o;
  bool dump = false;
  std::string checkpoint;
  app.add_option("--config", o.config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--seed", o.seed, "master seed (generate: scene seed)");
  app.add_option("--out", o.out, "output directory (generate: dataset file)");
  app.add_option("--epochs", o.epochs, "training epochs");
  app.add_option("--repeats", o.repeats, "repeats per dataset variant");
  app.add_option("--mode", o.mode, "subsampling mode for train: none|time|tx|rx|txrx");
  app.add_option("--factor", o.factor, "target subsampling factor for train");
  app.add_flag("--desk-scale", o.desk_scale, "2 subjects x 2 sequences");
  app.add_flag("--dump-config", dump, "print the effective configuration and exit");
  app.add_option("--checkpoint", checkpoint, "model checkpoint for saliency");

  auto* generate = app.add_subcommand("generate", "synthesize a sweep dataset file");
  auto* train = app.add_subcommand("train", "train one dataset variant (--mode, --factor)");
  auto* grid = app.add_subcommand("grid", "run the full experiment grid");
  auto* ablate = app.add_subcommand("ablate", "tiled upsampling, beam permutation, doubled epochs");
  auto* saliency_cmd = app.add_subcommand("saliency", "saliency map of a trained baseline model");
  auto* plot = app.add_subcommand("plot", "SVG plots from results.csv");
  for (auto* sub : {generate, train, grid, ablate, saliency_cmd, plot}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = resolve(o, app);
    if (dump) {
      std::cout << harness::dump_config(cfg);
      return 0;
    }
    if (app.get_subcommands().empty()) {
      std::cout << app.help();
      return 1;
    }

    if (generate->parsed()) {
      if (app.count("--seed")) cfg.scene.seed = o.seed;
      const std::string path = app.count("--out") ? o.out : "sweeps.isac";
      if (auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
      const auto frames = sweepgen::generate_session(cfg.scene, sweepgen::ArrayConfig{}, cfg.timing);
      dataset::save_dataset(path, frames, {cfg.timing.sweeps_per_second});
      std::cout << "wrote " << frames.size() << " sweeps to " << path << " (+ " << dataset::sidecar_path(path)
                << ")\n";
    } else if (train->parsed()) {
      const harness::GridEntry e{airtime::parse_mode(o.mode), o.factor};
      const auto plan = e.plan();
      auto data = harness::prepare(harness::load_or_generate(cfg, std::cout), cfg, std::cout);
      harness::VariantSplits v(data, plan, airtime::Upsampling::repeat);
      const auto r = harness::run_variant(fs::path(cfg.out_dir) / "entries" / e.key(), plan.to_string(), v.splits(),
                                          harness::entry_train_config(cfg, e), std::cout,
                                          e.mode == airtime::SubsampleMode::none);
      harness::write_results_csv(std::cout,
                                 {harness::make_row(plan, r.mu, r.sigma, cfg.train.repeats, cfg.train.epochs)});
    } else if (grid->parsed()) {
      harness::run_grid(cfg, std::cout);
      std::cout << "results in " << (fs::path(cfg.out_dir) / "results.csv").string() << '\n';
    } else if (ablate->parsed()) {
      harness::run_ablations(cfg, std::cout);
      std::cout << "ablations in " << (fs::path(cfg.out_dir) / "ablations.csv").string() << '\n';
    } else if (saliency_cmd->parsed()) {
      const std::string ckpt =
          checkpoint.empty() ? (fs::path(cfg.out_dir) / "entries" / "none-1" / "model.ckpt").string() : checkpoint;
      auto model = classifier::load_checkpoint(ckpt);
      auto data = harness::prepare(harness::load_or_generate(cfg, std::cout), cfg, std::cout);
      harness::VariantSplits v(data, airtime::make_plan(airtime::SubsampleMode::none, 1), airtime::Upsampling::repeat);
      auto map = saliency::compute_saliency(model, v.test, cfg.saliency_samples, cfg.master_seed);
      map.source_model = classifier::checkpoint_hash(model);
      if (map.used_all) {
        std::cerr << "warning: test split has " << v.test.size() << " windows, fewer than the " << cfg.saliency_samples
                  << " requested; using all of them\n";
      }
      const auto stem = fs::path(cfg.out_dir) / ("saliency_" + map.source_model);
      fs::create_directories(cfg.out_dir);
      saliency::export_saliency(map, stem.string() + ".csv", saliency::ExportFormat::csv);
      saliency::export_saliency(map, stem.string() + ".pgm", saliency::ExportFormat::pgm);
      std::cout << "saliency over " << map.n_samples << " windows: " << stem.string() << ".{csv,pgm}\n"
                << "central-half mass tx " << harness::fmt6(saliency::central_half_fraction(map, true)) << " rx "
                << harness::fmt6(saliency::central_half_fraction(map, false)) << '\n';
    } else if (plot->parsed()) {
      const auto set = harness::emit_plots((fs::path(cfg.out_dir) / "results.csv").string(), cfg.out_dir);
      for (const auto& f : set.files) std::cout << "wrote " << f << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
