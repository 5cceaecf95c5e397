#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "isac/airtime/plan.hpp"
#include "isac/airtime/resample.hpp"

using namespace isac;
using airtime::Rational;
using airtime::SubsampleMode;

namespace {

// Counts kept indices by walking the axis, independent of the closed form.
Rational brute_actual(int d, int s) {
  int kept = 0;
  for (int i = 0; i < d; ++i) {
    if (i % s == 0) ++kept;
  }
  return Rational(d, kept);
}

nn::Tensor<int> iota_window(std::array<std::size_t, 3> dims) {
  nn::Tensor<int> t({dims[0], dims[1], dims[2]});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<int>(i);
  return t;
}

}  // namespace

TEST_CASE("actual factor table for d = 20") {
  const std::vector<Rational> want{1, 2, Rational(20, 7), 4, 5, 5, Rational(20, 3), Rational(20, 3), Rational(20, 3)};
  for (int s = 1; s <= 9; ++s) CHECK(airtime::actual_factor(20, s) == want[s - 1]);
  CHECK(airtime::actual_factor(20, 6) == Rational(5));
  CHECK(airtime::actual_factor(56, 8) == Rational(8));
  CHECK(airtime::actual_factor(37, 1) == Rational(1));
}

TEST_CASE("actual factor agrees with a brute-force count") {
  for (int d = 1; d <= 64; ++d) {
    for (int s = 1; s <= 16; ++s) {
      const auto a = airtime::actual_factor(d, s);
      REQUIRE(a == brute_actual(d, s));
      CHECK(a <= Rational(s));
      CHECK((a == Rational(s)) == (d % s == 0));
    }
  }
  CHECK_THROWS_AS(airtime::actual_factor(0, 2), InputError);
}

TEST_CASE("plans") {
  auto p = airtime::make_plan(SubsampleMode::time, 5);
  CHECK(p.axes[airtime::kTime].kept == std::vector<std::size_t>{0, 5, 10, 15});
  CHECK(p.actual_factor == Rational(5));
  p = airtime::make_plan(SubsampleMode::time, 7);
  CHECK(p.axes[airtime::kTime].kept == std::vector<std::size_t>{0, 7, 14});
  CHECK(p.actual_factor == Rational(20, 3));

  p = airtime::make_plan(SubsampleMode::txrx, 9);
  CHECK(p.axes[airtime::kTx].factor == 3);
  CHECK(p.axes[airtime::kTx].kept.size() == 17);
  CHECK(p.axes[airtime::kTx].kept.back() == 48);
  CHECK(p.axes[airtime::kRx].kept.size() == 19);
  CHECK(p.axes[airtime::kRx].kept.back() == 54);
  CHECK(p.actual_factor == Rational(50, 17) * Rational(56, 19));
  CHECK(p.to_string() == "mode=txrx s=9 s'=2800/323");

  CHECK(airtime::make_plan(SubsampleMode::txrx, 4).actual_factor == Rational(4));
  CHECK(airtime::make_plan(SubsampleMode::none, 1).actual_factor == Rational(1));
  CHECK(airtime::make_plan(SubsampleMode::rx, 1).actual_factor == Rational(1));
  CHECK_THROWS_AS(airtime::make_plan(SubsampleMode::txrx, 6), InputError);
  CHECK_THROWS_AS(airtime::make_plan(SubsampleMode::txrx, 16), InputError);
  CHECK_THROWS_AS(airtime::make_plan(SubsampleMode::time, 0), InputError);
  CHECK_THROWS_AS(airtime::parse_mode("diagonal"), InputError);
}

TEST_CASE("plan invariants over every mode and factor") {
  for (auto m : {SubsampleMode::time, SubsampleMode::tx, SubsampleMode::rx}) {
    for (int s = 1; s <= 16; ++s) {
      const auto p = airtime::make_plan(m, s);
      Rational product{1};
      for (std::size_t a = 0; a < 3; ++a) {
        const auto& ax = p.axes[a];
        CHECK(ax.kept.size() == (ax.length + ax.factor - 1) / ax.factor);
        for (std::size_t k = 0; k < ax.kept.size(); ++k) CHECK(ax.kept[k] == k * ax.factor);
        product *= airtime::actual_factor(static_cast<std::int64_t>(ax.length), static_cast<std::int64_t>(ax.factor));
      }
      CHECK(p.actual_factor == product);
      const auto air = airtime::airtime_report(p);
      CHECK(air.sensing_fraction * p.actual_factor == Rational(1));
      CHECK(air.sensing_fraction + air.comms_fraction == Rational(1));
      CHECK(air.sensing_fraction > Rational(0));
      CHECK(air.comms_fraction >= Rational(0));
    }
  }
}

TEST_CASE("airtime report") {
  auto r = airtime::airtime_report(airtime::make_plan(SubsampleMode::txrx, 4));
  CHECK(r.sensing_fraction == Rational(1, 4));
  CHECK(r.comms_fraction == Rational(3, 4));
  r = airtime::airtime_report(airtime::make_plan(SubsampleMode::none, 1));
  CHECK(r.sensing_fraction == Rational(1));
  CHECK(r.comms_fraction == Rational(0));
  r = airtime::airtime_report(airtime::make_plan(SubsampleMode::time, 9));
  CHECK(r.sensing_fraction == Rational(3, 20));
  CHECK(r.comms_fraction == Rational(17, 20));
  CHECK(airtime::format_rational(Rational(2800, 323)) == "2800/323");
  CHECK(airtime::parse_rational("20/3") == Rational(20, 3));
  CHECK(airtime::parse_rational("5") == Rational(5));
}

TEST_CASE("one-dimensional worked example") {
  const std::vector<char> v{'0', '1', '2', '3', '4'};
  const auto kept = airtime::subsample_axis<char>(v, 3);
  CHECK(kept == std::vector<char>{'0', '3'});
  CHECK(airtime::upsample_axis<char>(kept, 3, 5) == std::vector<char>{'0', '0', '0', '3', '3'});
  CHECK(airtime::upsample_tiled_axis<char>(kept, 5) == std::vector<char>{'0', '3', '0', '3', '0'});
  const std::vector<int> six{10, 11, 12, 13, 14, 15};
  CHECK(airtime::upsample_axis<int>(airtime::subsample_axis<int>(six, 4), 4, 6) == std::vector<int>{10, 10, 10, 10, 14, 14});
}

TEST_CASE("window subsampling and upsampling") {
  const auto x = iota_window({20, 50, 56});
  const auto id = airtime::make_plan(SubsampleMode::none, 1);
  CHECK(airtime::subsample(x, id) == x);
  CHECK(airtime::upsample(x, id) == x);
  CHECK(airtime::upsample_tiled(x, id) == x);

  const auto t2 = airtime::make_plan(SubsampleMode::time, 2);
  const auto r = airtime::subsample(x, t2);
  CHECK(r.shape() == nn::Shape{10, 50, 56});
  CHECK(r.at(3, 7, 9) == x.at(6, 7, 9));
  CHECK(airtime::upsample(r, t2).shape() == nn::Shape{20, 50, 56});

  const auto p9 = airtime::make_plan(SubsampleMode::txrx, 9);
  const auto r9 = airtime::subsample(x, p9);
  CHECK(r9.shape() == nn::Shape{20, 17, 19});
  const auto up = airtime::upsample(r9, p9);
  CHECK(up.shape() == nn::Shape{20, 50, 56});
  CHECK(up.at(5, 49, 55) == x.at(5, 48, 54));
  CHECK(airtime::upsample_tiled(r9, p9).shape() == nn::Shape{20, 50, 56});

  CHECK_THROWS_AS(airtime::subsample(iota_window({20, 50, 55}), t2), ShapeError);
  CHECK_THROWS_AS(airtime::upsample(x, t2), ShapeError);
}

TEST_CASE("upsample preserves kept positions and run structure") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dd(1, 64), sd(1, 16);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = dd(rng), s = sd(rng);
    std::vector<double> v(static_cast<std::size_t>(d));
    for (auto& e : v) e = std::normal_distribution<double>()(rng);
    const auto kept = airtime::subsample_axis<double>(v, static_cast<std::size_t>(s));
    const auto up = airtime::upsample_axis<double>(kept, static_cast<std::size_t>(s), v.size());
    REQUIRE(up.size() == v.size());
    for (std::size_t k = 0; k < v.size(); k += static_cast<std::size_t>(s)) REQUIRE(up[k] == v[k]);
    std::size_t runs = 1;
    for (std::size_t i = 1; i < up.size(); ++i) runs += up[i] != up[i - 1];
    CHECK(runs == (v.size() + s - 1) / s);
  }
}

TEST_CASE("source index maps compose subsample and upsample") {
  const auto x = iota_window({20, 50, 56});
  for (auto [m, s] : std::vector<std::pair<SubsampleMode, int>>{
           {SubsampleMode::time, 7}, {SubsampleMode::tx, 6}, {SubsampleMode::rx, 9}, {SubsampleMode::txrx, 4}}) {
    const auto p = airtime::make_plan(m, s);
    for (auto kind : {airtime::Upsampling::repeat, airtime::Upsampling::tiled}) {
      const auto direct = airtime::upsample_with(airtime::subsample(x, p), p, kind);
      std::array<std::vector<std::size_t>, 3> maps;
      for (std::size_t a = 0; a < 3; ++a) maps[a] = airtime::source_index_map(p, a, kind);
      bool same = true;
      for (std::size_t i = 0; i < 20; ++i)
        for (std::size_t j = 0; j < 50; ++j)
          for (std::size_t k = 0; k < 56; ++k) same &= direct.at(i, j, k) == x.at(maps[0][i], maps[1][j], maps[2][k]);
      CHECK(same);
    }
  }
}
