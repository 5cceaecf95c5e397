#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>

#include "isac/classifier/checkpoint.hpp"
#include "isac/classifier/model.hpp"
#include "isac/classifier/train.hpp"
#include "isac/nn/loss.hpp"
#include "layer_checks.hpp"

using namespace isac;
using namespace isac::classifier;
using Catch::Matchers::WithinAbs;

namespace {

Tensor<double> random_batch(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return testing::random_tensor({n, kWindow, kTxBeams, kRxBeams}, rng);
}

// Two classes told apart by which quadrant carries a +2 offset.
TensorSource two_class_source(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  TensorSource src;
  for (std::size_t k = 0; k < n; ++k) {
    const int label = static_cast<int>(k % 2);
    Tensor<double> w({kWindow, kTxBeams, kRxBeams});
    for (std::size_t t = 0; t < kWindow; ++t)
      for (std::size_t i = 0; i < kTxBeams; ++i)
        for (std::size_t j = 0; j < kRxBeams; ++j) {
          const bool hot = label == 0 ? (i < 25 && j < 28) : (i >= 25 && j >= 28);
          w.at(t, i, j) = nd(rng) + (hot ? 2.0 : 0.0);
        }
    src.add(w, label);
  }
  return src;
}

// Predicts a fixed class regardless of input.
class ConstantSource final : public WindowSource {
 public:
  ConstantSource(std::vector<int> labels) : labels_(std::move(labels)) {}
  std::size_t size() const override { return labels_.size(); }
  int label(std::size_t i) const override { return labels_[i]; }
  void fill(std::size_t, std::span<double> out) const override { std::fill(out.begin(), out.end(), 0.0); }

 private:
  std::vector<int> labels_;
};

}  // namespace

TEST_CASE("model shapes and determinism") {
  CHECK(kFlatten == 384);
  ClassifierModel<double> a(7), b(7), c(8);
  const auto x = random_batch(4, 1);
  const auto ya = a.forward(x, Mode::train);
  CHECK(ya.shape() == nn::Shape{4, 8});
  CHECK(ya == b.forward(x, Mode::train));
  CHECK_FALSE(ya == c.forward(x, Mode::train));
  std::size_t n_params = 0;
  for (auto& p : a.params()) n_params += p.value->size();
  CHECK(n_params == (20 * 16 * 9 + 16) + 32 + (16 * 32 * 9 + 32) + 64 + (32 * 64 * 49 + 64) + 128 + (384 * 8 + 8));
}

TEST_CASE("initial loss is near ln 8") {
  ClassifierModel<double> m(0);
  std::vector<int> labels(64);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 8);
  const auto logits = m.forward(random_batch(64, 3), Mode::train);
  const double loss = nn::softmax_cross_entropy(logits, std::span<const int>(labels)).loss;
  CHECK_THAT(loss, WithinAbs(std::log(8.0), 0.1));
}

TEST_CASE("input-size errors name the minimum size") {
  ClassifierModel<double> m(0);
  CHECK_THROWS_WITH(m.forward(Tensor<double>({2, 20, 17, 19}), Mode::eval),
                    Catch::Matchers::ContainsSubstring("minimum size required"));
  CHECK_THROWS_AS(m.forward(Tensor<double>({2, 19, 50, 56}), Mode::eval), ShapeError);
  ClassifierModel<double> fresh(0);
  CHECK_THROWS_AS(fresh.backward(Tensor<double>({2, 8})), StateError);
}

TEST_CASE("eval mode is per-sample, train mode uses batch statistics") {
  ClassifierModel<double> m(2);
  auto x = random_batch(5, 9);
  // Shift running statistics away from their initial values.
  m.forward(x, Mode::train);
  const auto ye = m.forward(x, Mode::eval);
  // Reverse the batch: eval outputs permute with it.
  Tensor<double> xr(x.shape());
  for (std::size_t s = 0; s < 5; ++s)
    std::copy_n(x.ptr() + s * kWindowSize, kWindowSize, xr.ptr() + (4 - s) * kWindowSize);
  const auto yr = m.forward(xr, Mode::eval);
  for (std::size_t s = 0; s < 5; ++s)
    for (std::size_t k = 0; k < 8; ++k) CHECK_THAT(yr.at(4 - s, k), WithinAbs(ye.at(s, k), 1e-12));
  const auto yt = m.forward(x, Mode::train);
  double diff = 0.0;
  for (std::size_t i = 0; i < yt.size(); ++i) diff = std::max(diff, std::abs(yt[i] - ye[i]));
  CHECK(diff > 1e-6);
}

TEST_CASE("separable miniature task is learned") {
  const auto tr = two_class_source(120, 1), va = two_class_source(20, 2), te = two_class_source(20, 3);
  TrainConfig cfg;
  cfg.epochs = 12;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-3;
  cfg.repeats = 1;
  std::vector<EpochMetrics> seen;
  ClassifierModel<double> m(0);
  const auto r = train(m, {&tr, &va, &te}, cfg, [&](int, const EpochMetrics& e) { seen.push_back(e); });
  REQUIRE(r.epochs.size() == 12);
  CHECK(seen.size() == 12);
  CHECK(r.best_val_accuracy == 1.0);
  CHECK(r.test_accuracy >= 0.95);
  // best_epoch is the first epoch achieving the best validation accuracy.
  double best = -1.0;
  int first = 0;
  for (std::size_t e = 0; e < r.epochs.size(); ++e) {
    if (r.epochs[e].val_accuracy > best) best = r.epochs[e].val_accuracy, first = static_cast<int>(e) + 1;
  }
  CHECK(r.best_epoch == first);
  CHECK(r.epochs.back().train_loss < r.epochs.front().train_loss);
  std::uint64_t total = 0, trace = 0;
  for (std::size_t a = 0; a < kClasses; ++a)
    for (std::size_t b = 0; b < kClasses; ++b) total += r.confusion[a][b], trace += a == b ? r.confusion[a][b] : 0;
  CHECK(total == 20);
  CHECK(static_cast<double>(trace) / 20.0 == r.test_accuracy);
}

TEST_CASE("repeat statistics") {
  const double two[] = {0.9, 0.8};
  const auto [mu, sigma] = mean_stddev(two);
  CHECK_THAT(mu, WithinAbs(0.85, 1e-15));
  CHECK_THAT(sigma, WithinAbs(0.05, 1e-15));
  const double one[] = {0.7};
  CHECK(mean_stddev(one).second == 0.0);

  const auto tr = two_class_source(8, 4), va = two_class_source(4, 5), te = two_class_source(4, 6);
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  cfg.repeats = 2;
  cfg.seed = 40;
  std::vector<std::uint64_t> seeds;
  const auto s = repeat_experiment({&tr, &va, &te}, cfg, [&](int, const RunMetrics& m, auto&) { seeds.push_back(m.seed); });
  CHECK(seeds == std::vector<std::uint64_t>{40, 41});
  const double accs[] = {s.runs[0].test_accuracy, s.runs[1].test_accuracy};
  CHECK(s.mean == mean_stddev(accs).first);
  cfg.repeats = 1;
  CHECK(repeat_experiment({&tr, &va, &te}, cfg).stddev == 0.0);
  // Same seed, same run.
  CHECK(repeat_experiment({&tr, &va, &te}, cfg).runs[0] == s.runs[0]);
}

TEST_CASE("confusion of a constant predictor") {
  ClassifierModel<double> m(0);
  for (auto& v : m.head.weights.data()) v = 0.0;
  for (auto& v : m.head.bias.data()) v = 0.0;
  m.head.bias[3] = 1.0;
  ConstantSource src({0, 3, 3, 5, 7, 3});
  const auto r = evaluate(m, src, 4);
  CHECK(r.confusion[3][3] == 3);
  CHECK(r.confusion[0][3] == 1);
  CHECK(r.confusion[5][3] == 1);
  CHECK(r.confusion[7][3] == 1);
  CHECK(r.accuracy == 0.5);
}

TEST_CASE("training config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.batch_size = 1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = {};
  c.epochs = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  ClassifierModel<double> m(0);
  TensorSource empty;
  const auto tr = two_class_source(4, 1);
  CHECK_THROWS_AS(train(m, {&tr, &empty, &tr}, TrainConfig{}), ConfigError);
}

TEST_CASE("checkpoint round trip") {
  ClassifierModel<double> m(5);
  auto x = random_batch(3, 2);
  std::vector<int> labels{1, 4, 6};
  for (int step = 0; step < 2; ++step) {
    auto loss = nn::softmax_cross_entropy(m.forward(x, Mode::train), std::span<const int>(labels));
    m.backward(loss.grad_logits);
    m.adam_update(1e-3);
  }
  std::stringstream ss;
  write_checkpoint(ss, m);
  const std::string bytes = ss.str();
  auto back = read_checkpoint(ss);
  CHECK(back.rng_seed == 5);
  CHECK(back.adam.step == m.adam.step);
  const auto a = m.snapshot(), b = back.snapshot();
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  for (std::size_t i = 0; i < m.adam.m.size(); ++i) CHECK(m.adam.m[i] == back.adam.m[i]);
  CHECK(m.forward(x, Mode::eval) == back.forward(x, Mode::eval));
  CHECK(checkpoint_hash(m) == checkpoint_hash(back));
  CHECK(checkpoint_hash(m).size() == 16);

  std::string bad = bytes;
  bad[0] = 'J';
  std::stringstream s1(bad);
  CHECK_THROWS_AS(read_checkpoint(s1), FormatError);
  bad = bytes;
  bad[8] = 9;
  std::stringstream s2(bad);
  CHECK_THROWS_AS(read_checkpoint(s2), UnsupportedVersionError);
  std::stringstream s3(bytes.substr(0, bytes.size() - 100));
  CHECK_THROWS_WITH(read_checkpoint(s3), Catch::Matchers::ContainsSubstring("byte offset"));

  const auto path = (std::filesystem::temp_directory_path() / "isac_test_model.ckpt").string();
  save_checkpoint(path, m);
  auto loaded = load_checkpoint(path);
  CHECK(checkpoint_hash(loaded) == checkpoint_hash(m));
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), IoError);
}
