#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "isac/saliency/permute.hpp"
#include "isac/saliency/saliency.hpp"
#include "layer_checks.hpp"

using namespace isac;
using namespace isac::saliency;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

classifier::TensorSource random_windows(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  classifier::TensorSource src;
  for (std::size_t i = 0; i < n; ++i) {
    src.add(testing::random_tensor({classifier::kWindow, kTxBeams, kRxBeams}, rng), static_cast<int>(i % 8));
  }
  return src;
}

sweepgen::FrameStore numbered_frames(std::size_t n) {
  sweepgen::FrameStore s;
  for (std::size_t f = 0; f < n; ++f) {
    std::vector<float> p(s.frame_size());
    for (std::size_t c = 0; c < p.size(); ++c) p[c] = static_cast<float>(f * 10000 + c);
    s.push_back(p, {0, 0, static_cast<std::uint32_t>(f % 8)});
  }
  return s;
}

}  // namespace

TEST_CASE("zero-weight model has an all-zero saliency map") {
  classifier::ClassifierModel<double> m(1);
  for (auto& p : m.params()) std::fill(p.value->data().begin(), p.value->data().end(), 0.0);
  const auto src = random_windows(5, 2);
  const auto map = compute_saliency(m, src, 5);
  CHECK(map.n_samples == 5);
  CHECK(std::all_of(map.values.data().begin(), map.values.data().end(), [](double v) { return v == 0.0; }));
  CHECK(central_half_fraction(map, true) == 0.0);
}

TEST_CASE("saliency is deterministic and independent of batching") {
  classifier::ClassifierModel<double> m(3);
  const auto src = random_windows(9, 4);
  const auto a = compute_saliency(m, src, 6, 11, 32);
  const auto b = compute_saliency(m, src, 6, 11, 32);
  CHECK(a.values == b.values);
  const auto c = compute_saliency(m, src, 6, 11, 4);
  for (std::size_t i = 0; i < a.values.size(); ++i) REQUIRE_THAT(c.values[i], WithinAbs(a.values[i], 1e-12));
  CHECK(std::all_of(a.values.data().begin(), a.values.data().end(), [](double v) { return v >= 0.0; }));
  CHECK(std::any_of(a.values.data().begin(), a.values.data().end(), [](double v) { return v > 0.0; }));
  CHECK_FALSE(a.used_all);
  CHECK(compute_saliency(m, src, 50).used_all);
}

TEST_CASE("sample selection") {
  const auto s = select_samples(100, 10, 5);
  CHECK(s.size() == 10);
  CHECK(std::is_sorted(s.begin(), s.end()));
  CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
  CHECK(s == select_samples(100, 10, 5));
  CHECK(select_samples(4, 10, 5) == std::vector<std::size_t>{0, 1, 2, 3});
}

TEST_CASE("central-half fraction") {
  SaliencyMap m;
  m.values.at(25, 0) = 1.0;  // central tx, edge rx
  CHECK(central_half_fraction(m, true) == 1.0);
  CHECK(central_half_fraction(m, false) == 0.0);
  for (auto& v : m.values.data()) v = 1.0;
  // Uniform mass: exactly half on either axis, including half-covered edge beams.
  CHECK_THAT(central_half_fraction(m, true), WithinAbs(0.5, 1e-12));
  CHECK_THAT(central_half_fraction(m, false), WithinAbs(0.5, 1e-12));
}

TEST_CASE("beam permutations") {
  const auto p = BeamPermutation::random(50, 56, 9);
  CHECK_NOTHROW(p.validate(50, 56));
  CHECK_FALSE(p.tx == BeamPermutation::identity(50, 56).tx);
  CHECK(p.tx == BeamPermutation::random(50, 56, 9).tx);
  const auto frames = numbered_frames(4);
  CHECK(permute_beams(frames, BeamPermutation::identity(50, 56)) == frames);
  const auto out = permute_beams(frames, p);
  CHECK(permute_beams(out, p.inverse()) == frames);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    CHECK(out.tag(f) == frames.tag(f));
    std::vector<float> a(frames.frame(f).begin(), frames.frame(f).end()), b(out.frame(f).begin(), out.frame(f).end());
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    CHECK(a == b);
    CHECK(out.frame(f)[3 * 56 + 7] == frames.frame(f)[p.tx[3] * 56 + p.rx[7]]);
  }
  BeamPermutation bad = BeamPermutation::identity(50, 56);
  bad.rx[0] = 1;
  CHECK_THROWS_AS(bad.validate(50, 56), InputError);
  CHECK_THROWS_AS(permute_beams(frames, bad), InputError);
}

TEST_CASE("saliency export") {
  const auto dir = fs::temp_directory_path() / "isac_saliency_test";
  fs::create_directories(dir);
  SaliencyMap m;
  std::mt19937_64 rng(3);
  for (auto& v : m.values.data()) v = std::uniform_real_distribution<double>(0.0, 1e-3)(rng);
  const auto csv = (dir / "m.csv").string(), pgm = (dir / "m.pgm").string();
  export_saliency(m, csv, ExportFormat::csv);
  CHECK(read_saliency_csv(csv).values == m.values);

  export_saliency(m, pgm, ExportFormat::pgm);
  std::ifstream is(pgm, std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  is >> magic >> w >> h >> maxval;
  is.get();
  std::vector<unsigned char> px(static_cast<std::size_t>(w * h));
  is.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
  CHECK(magic == "P5");
  CHECK(w == 56);
  CHECK(h == 50);
  CHECK(maxval == 255);
  CHECK(is.gcount() == 2800);
  CHECK(*std::max_element(px.begin(), px.end()) == 255);
  CHECK(*std::min_element(px.begin(), px.end()) == 0);

  SaliencyMap zero;
  export_saliency(zero, pgm, ExportFormat::pgm);
  std::ifstream z(pgm, std::ios::binary);
  std::string all((std::istreambuf_iterator<char>(z)), {});
  CHECK(std::count(all.end() - 2800, all.end(), '\0') == 2800);

  { std::ofstream(csv) << "1,2,x\n"; }
  CHECK_THROWS_AS(read_saliency_csv(csv), ParseError);
  fs::remove_all(dir);
}
