#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <regex>
#include <sstream>

#include "isac/harness/config.hpp"
#include "isac/harness/grid.hpp"
#include "isac/harness/plots.hpp"
#include "isac/harness/results.hpp"
#include "tiny_grid.hpp"

using namespace isac;
using namespace isac::harness;
using airtime::Rational;
using airtime::SubsampleMode;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

std::size_t parse_error_line(const std::string& text) {
  std::istringstream is(text);
  try {
    parse_config(is);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::vector<std::string> attr_values(const std::string& svg, const std::string& attr) {
  std::vector<std::string> out;
  const std::regex re(attr + "=\"([^\"]*)\"");
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it) {
    out.push_back((*it)[1]);
  }
  return out;
}

}  // namespace

TEST_CASE("default grid") {
  const auto g = default_grid();
  CHECK(g.size() == 27);
  CHECK(g.front() == GridEntry{SubsampleMode::none, 1});
  CHECK(g.back() == GridEntry{SubsampleMode::txrx, 9});
  CHECK(parse_entry("rx:7") == GridEntry{SubsampleMode::rx, 7});
  CHECK_THROWS_AS(parse_entry("rx7"), ConfigError);
  CHECK_THROWS_AS(parse_entry("txrx:5"), InputError);
}

TEST_CASE("config text round trip") {
  ExperimentConfig c;
  c.train.epochs = 12;
  c.window_stride = 36;
  c.grid = {{SubsampleMode::none, 1}, {SubsampleMode::txrx, 4}};
  c.scene.noise_std_db = 0.37;
  c.dataset_path = "/tmp/x.isac";
  const auto text = dump_config(c);
  std::istringstream is(text);
  const auto back = parse_config(is);
  CHECK(dump_config(back) == text);
  CHECK(back.grid == c.grid);
  CHECK(back.scene.noise_std_db == 0.37);

  std::istringstream partial("# comment\n[train]\nepochs = 3  # trailing\n");
  const auto p = parse_config(partial, c);
  CHECK(p.train.epochs == 3);
  CHECK(p.window_stride == 36);
}

TEST_CASE("config errors carry line numbers") {
  CHECK(parse_error_line("[train]\nepochs = x\n") == 2);
  CHECK(parse_error_line("\n\n[train]\nwarmup = 3\n") == 4);
  CHECK(parse_error_line("[grid]\nentries = none:1 txrx:6\n") == 2);
  CHECK(parse_error_line("[train\n") == 1);
  CHECK(parse_error_line("[run]\nmaster_seed\n") == 2);
  std::istringstream timing("[timing]\ndwell_per_pair = 2.5e-6\n");
  CHECK_THROWS_AS(parse_config(timing), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.txt"), IoError);
}

TEST_CASE("results csv round trip and errors") {
  std::vector<ResultRow> rows{make_row(airtime::make_plan(SubsampleMode::none, 1), 0.9, 0.01, 3, 30),
                              make_row(airtime::make_plan(SubsampleMode::txrx, 9), 0.1 + 0.2, 0.0, 3, 30)};
  std::stringstream ss;
  write_results_csv(ss, rows);
  CHECK(read_results_csv(ss) == rows);

  auto err_line = [](const std::string& text) -> std::size_t {
    std::istringstream is(text);
    try {
      read_results_csv(is);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string h = std::string(kResultsHeader) + "\n";
  CHECK(err_line("mode,s\n") == 1);
  CHECK(err_line(h + to_csv_line(rows[0]) + "\nnone,1,1\n") == 3);
  CHECK(err_line(h + "none,1,1,1.0,1,0,abc,0,1,1\n") == 2);
  CHECK(err_line(h + "none,1,1,1.0,1,0,1.5,0,1,1\n") == 2);
  CHECK(err_line(h + "diag,1,1,1.0,1,0,0.5,0,1,1\n") == 2);
}

TEST_CASE("rows with equal actual factor are pooled") {
  std::vector<ResultRow> rows{make_row(airtime::make_plan(SubsampleMode::time, 4), 0.95, 0.0, 1, 1),
                              make_row(airtime::make_plan(SubsampleMode::time, 5), 0.8, 0.0, 1, 1),
                              make_row(airtime::make_plan(SubsampleMode::time, 6), 0.9, 0.0, 1, 1),
                              make_row(airtime::make_plan(SubsampleMode::tx, 5), 0.7, 0.0, 1, 1)};
  const auto a = group_by_actual(rows);
  REQUIRE(a.size() == 3);
  CHECK(a[1].mode == SubsampleMode::time);
  CHECK(a[1].s_prime == Rational(5));
  CHECK(a[1].targets == std::vector<int>{5, 6});
  CHECK(a[1].n_runs == 2);
  CHECK_THAT(a[1].mu, WithinAbs(0.85, 1e-12));
  CHECK_THAT(a[1].sigma, WithinAbs(0.05, 1e-9));
  CHECK(a[2].mode == SubsampleMode::tx);

  // Pooling reproduces the moments of the union of runs.
  std::vector<ResultRow> two{make_row(airtime::make_plan(SubsampleMode::time, 7), 0.8, 0.02, 3, 1),
                             make_row(airtime::make_plan(SubsampleMode::time, 8), 0.86, 0.01, 2, 1)};
  const auto p = group_by_actual(two);
  REQUIRE(p.size() == 1);
  const double mu = (3 * 0.8 + 2 * 0.86) / 5;
  const double ex2 = (3 * (0.02 * 0.02 + 0.64) + 2 * (0.01 * 0.01 + 0.86 * 0.86)) / 5;
  CHECK_THAT(p[0].mu, WithinAbs(mu, 1e-15));
  CHECK_THAT(p[0].sigma, WithinAbs(std::sqrt(ex2 - mu * mu), 1e-9));
}

TEST_CASE("plots") {
  const auto dir = testing::scratch_dir("isac_plots");
  const auto csv = dir / "results.csv";
  auto write = [&](const std::vector<ResultRow>& rows) {
    std::ostringstream os;
    write_results_csv(os, rows);
    write_atomic(csv, os.str());
  };

  write({make_row(airtime::make_plan(SubsampleMode::none, 1), 0.93, 0.0, 1, 30)});
  auto set = emit_plots(csv.string(), dir.string());
  REQUIRE(set.files.size() == 2);
  for (const auto& f : set.files) {
    const auto svg = testing::slurp(f);
    CHECK(attr_values(svg, "data-lo").empty());
    CHECK(attr_values(svg, "data-mu") == std::vector<std::string>{"0.93000000000000005"});
  }

  write({make_row(airtime::make_plan(SubsampleMode::none, 1), 0.9, 0.02, 3, 30),
         make_row(airtime::make_plan(SubsampleMode::txrx, 4), 0.88, 0.03, 3, 30),
         make_row(airtime::make_plan(SubsampleMode::time, 5), 0.8, 0.0, 3, 30),
         make_row(airtime::make_plan(SubsampleMode::time, 6), 0.82, 0.0, 3, 30)});
  set = emit_plots(csv.string(), dir.string());
  const auto target = testing::slurp(set.files[0]), actual = testing::slurp(set.files[1]);
  const auto lo = attr_values(target, "data-lo"), hi = attr_values(target, "data-hi");
  REQUIRE(lo.size() == 2);
  CHECK(std::stod(lo[0]) == 0.9 - 0.02);
  CHECK(std::stod(hi[0]) == 0.9 + 0.02);
  CHECK(std::stod(lo[1]) == 0.88 - 0.03);
  // time:5 and time:6 share s' = 5 and appear once in the actual plot; the
  // pooled spread of 0.8 and 0.82 gives it an error bar there.
  CHECK(attr_values(target, "data-mu").size() == 4);
  CHECK(attr_values(actual, "data-mu").size() == 3);
  CHECK(attr_values(actual, "data-lo").size() == 3);
  CHECK(attr_values(target, "data-points").empty());
  const auto pts = attr_values(actual, "data-points");
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].find("4,0.75 ") != std::string::npos);
  CHECK(pts[0].rfind("1,0 ", 0) == 0);

  const auto curve = comms_curve(6.0);
  CHECK(std::find(curve.begin(), curve.end(), std::pair<double, double>{4.0, 0.75}) != curve.end());
  CHECK(mode_offset(SubsampleMode::rx) - mode_offset(SubsampleMode::tx) == Catch::Approx(0.05));

  { std::ofstream(csv) << kResultsHeader << "\nnone,1,1,1.0,1,0,0.9,0,1,1\nnone,x\n"; }
  CHECK_THROWS_WITH(emit_plots(csv.string(), dir.string()), Catch::Matchers::StartsWith("line 3"));
  fs::remove_all(dir);
}

TEST_CASE("tiny grid: determinism, resume, pooling and ablation order") {
  const auto root = testing::scratch_dir("isac_grid");
  auto cfg = testing::tiny_config((root / "a").string());
  cfg.grid = {{SubsampleMode::none, 1}, {SubsampleMode::time, 5}, {SubsampleMode::time, 6}};
  std::ostringstream log;

  CHECK_THROWS_AS(run_ablations(cfg, log), OrderingError);

  const auto data = prepare(load_or_generate(cfg, log), cfg, log);
  const auto g = run_grid(cfg, log, &data);
  REQUIRE(g.rows.size() == 3);
  REQUIRE(g.actual.size() == 2);
  CHECK(g.actual[1].targets == std::vector<int>{5, 6});
  for (const auto& r : g.rows) CHECK(r.sensing_fraction * r.s_prime == Rational(1));
  const auto first = testing::slurp(root / "a" / "results.csv");
  CHECK(fs::exists(root / "a" / "entries" / "none-1" / "model.ckpt"));
  CHECK_FALSE(fs::exists(root / "a" / "entries" / "time-5" / "model.ckpt"));
  CHECK(fs::exists(root / "a" / "entries" / "time-5" / "epochs.csv"));
  CHECK(fs::exists(root / "a" / "split_manifest.txt"));

  // Same out_dir again: every entry resumes from its summary.
  std::ostringstream log2;
  run_grid(cfg, log2, &data);
  CHECK(testing::slurp(root / "a" / "results.csv") == first);
  CHECK(log2.str().find(" epoch ") == std::string::npos);
  CHECK(log2.str().find("resume") != std::string::npos);

  // Fresh out_dir, fresh data: byte-identical results.
  auto cfg_b = cfg;
  cfg_b.out_dir = (root / "b").string();
  run_grid(cfg_b, log);
  CHECK(testing::slurp(root / "b" / "results.csv") == first);

  // An unfinished entry is recomputed, not trusted.
  write_atomic(root / "a" / "entries" / "time-6" / "summary.txt", "repeats 1\nepochs 1\n");
  std::ostringstream log3;
  run_grid(cfg, log3, &data);
  CHECK(testing::slurp(root / "a" / "results.csv") == first);
  CHECK(log3.str().find("mode=time s=6 s'=5 run 0 epoch 1") != std::string::npos);

  const auto ab = run_ablations(cfg, log, &data);
  REQUIRE(ab.size() == 3);
  CHECK(ab[0].name == "tiled_upsampling");
  CHECK(ab[0].entry == GridEntry{SubsampleMode::txrx, 4});
  CHECK(ab[2].epochs == 2);
  for (const auto& r : ab) CHECK(r.baseline_mu == g.rows[0].mu);
  const auto abl = testing::slurp(root / "a" / "ablations.csv");
  CHECK(abl.rfind(kAblationHeader, 0) == 0);
  fs::remove_all(root);
}
