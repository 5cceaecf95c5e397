#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "isac/classifier/model.hpp"
#include "isac/error.hpp"
#include "isac/nn/loss.hpp"

namespace isac::classifier {

// Random-access view over labeled (20,50,56) windows. Implementations decide
// where the data lives; fill() writes one window in row-major order.
class WindowSource {
 public:
  virtual ~WindowSource() = default;
  virtual std::size_t size() const = 0;
  virtual int label(std::size_t i) const = 0;
  virtual void fill(std::size_t i, std::span<double> out) const = 0;
};

// Materialized windows, for tests and small experiments.
class TensorSource final : public WindowSource {
 public:
  void add(const Tensor<double>& window, int label) {
    if (window.size() != kWindowSize) throw ShapeError("window must hold 20*50*56 values");
    data_.insert(data_.end(), window.data().begin(), window.data().end());
    labels_.push_back(label);
  }
  std::size_t size() const override { return labels_.size(); }
  int label(std::size_t i) const override { return labels_.at(i); }
  void fill(std::size_t i, std::span<double> out) const override {
    std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(i * kWindowSize), kWindowSize, out.begin());
  }

 private:
  std::vector<double> data_;
  std::vector<int> labels_;
};

struct TrainConfig {
  int epochs = 100;
  double learning_rate = 3e-4;
  std::size_t batch_size = 512;
  int repeats = 25;
  std::uint64_t seed = 0;
  std::size_t eval_batch_size = 128;

  void validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 2) throw ConfigError("batch_size must be >= 2 (batchnorm needs batch statistics)");
    if (repeats < 1) throw ConfigError("repeats must be >= 1");
    if (eval_batch_size < 1) throw ConfigError("eval_batch_size must be >= 1");
  }
};

using Confusion = std::array<std::array<std::uint64_t, kClasses>, kClasses>;

struct EpochMetrics {
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  bool operator==(const EpochMetrics&) const = default;
};

struct RunMetrics {
  std::vector<EpochMetrics> epochs;
  int best_epoch = 0;  // 1-based
  double best_val_accuracy = 0.0;
  double test_accuracy = 0.0;
  Confusion confusion{};  // [true][predicted]
  std::uint64_t seed = 0;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct EvalResult {
  double accuracy = 0.0;
  Confusion confusion{};
};

struct Splits {
  const WindowSource* train = nullptr;
  const WindowSource* val = nullptr;
  const WindowSource* test = nullptr;
};

namespace detail {

inline Tensor<double> gather(const WindowSource& src, std::span<const std::size_t> idx, std::vector<int>& labels) {
  Tensor<double> batch({idx.size(), kWindow, kTxBeams, kRxBeams});
  labels.resize(idx.size());
  for (std::size_t b = 0; b < idx.size(); ++b) {
    src.fill(idx[b], batch.slab(b));
    labels[b] = src.label(idx[b]);
  }
  return batch;
}

}  // namespace detail

inline double confusion_accuracy(const Confusion& c) {
  std::uint64_t total = 0, hit = 0;
  for (std::size_t i = 0; i < kClasses; ++i) {
    for (std::size_t j = 0; j < kClasses; ++j) total += c[i][j];
    hit += c[i][i];
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

// Eval-mode accuracy and confusion; prediction is the argmax logit with ties
// going to the lowest class.
inline EvalResult evaluate(ClassifierModel<double>& model, const WindowSource& src, std::size_t batch_size = 128) {
  EvalResult r;
  std::vector<std::size_t> idx;
  std::vector<int> labels;
  for (std::size_t start = 0; start < src.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, src.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    auto logits = model.forward(detail::gather(src, idx, labels), Mode::eval);
    for (std::size_t b = 0; b < n; ++b) {
      const int pred = nn::argmax<double>(std::span<const double>(logits.ptr() + b * kClasses, kClasses));
      if (labels[b] < 0 || labels[b] >= static_cast<int>(kClasses)) throw InputError("label outside [0,8)");
      ++r.confusion[static_cast<std::size_t>(labels[b])][static_cast<std::size_t>(pred)];
    }
  }
  r.accuracy = confusion_accuracy(r.confusion);
  return r;
}

using EpochCallback = std::function<void(int epoch, const EpochMetrics&)>;

// Trains for config.epochs, snapshots the model whenever validation accuracy
// strictly improves (so ties keep the earlier epoch), and scores the test set
// with the best snapshot. The training order is reshuffled every epoch from
// config.seed. A final partial batch of one window is skipped (batchnorm).
inline RunMetrics train(ClassifierModel<double>& model, const Splits& splits, const TrainConfig& config,
                        const EpochCallback& on_epoch = {}) {
  config.validate();
  if (!splits.train || !splits.val || !splits.test) throw ConfigError("train/val/test split missing");
  if (splits.train->size() == 0) throw ConfigError("training split is empty");
  if (splits.val->size() == 0) throw ConfigError("validation split is empty");
  if (splits.test->size() == 0) throw ConfigError("test split is empty");
  if (splits.train->size() < 2) throw ConfigError("training split needs at least 2 windows");

  RunMetrics metrics;
  metrics.seed = config.seed;
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5bd1e9955bd1e995ULL);
  std::vector<std::size_t> order(splits.train->size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Tensor<double>> best;
  std::vector<int> labels;
  double best_val = -1.0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double loss_sum = 0.0;
    std::size_t seen = 0, correct = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t n = std::min(config.batch_size, order.size() - start);
      if (n < 2) break;
      auto batch = detail::gather(*splits.train, std::span<const std::size_t>(order).subspan(start, n), labels);
      auto logits = model.forward(std::move(batch), Mode::train);
      auto loss = nn::softmax_cross_entropy(logits, std::span<const int>(labels));
      for (std::size_t b = 0; b < n; ++b) {
        if (nn::argmax<double>(std::span<const double>(logits.ptr() + b * kClasses, kClasses)) == labels[b]) ++correct;
      }
      model.backward(loss.grad_logits, false);
      model.adam_update(config.learning_rate);
      loss_sum += loss.loss * static_cast<double>(n);
      seen += n;
    }
    EpochMetrics em;
    em.train_loss = loss_sum / static_cast<double>(seen);
    em.train_accuracy = static_cast<double>(correct) / static_cast<double>(seen);
    em.val_accuracy = evaluate(model, *splits.val, config.eval_batch_size).accuracy;
    metrics.epochs.push_back(em);
    if (em.val_accuracy > best_val) {
      best_val = em.val_accuracy;
      metrics.best_epoch = epoch;
      best = model.snapshot();
    }
    if (on_epoch) on_epoch(epoch, em);
  }

  model.restore(best);
  metrics.best_val_accuracy = best_val;
  const auto test = evaluate(model, *splits.test, config.eval_batch_size);
  metrics.test_accuracy = test.accuracy;
  metrics.confusion = test.confusion;
  return metrics;
}

struct RepeatSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::vector<RunMetrics> runs;
};

// Population mean / standard deviation.
inline std::pair<double, double> mean_stddev(std::span<const double> xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double sq = 0.0;
  for (double x : xs) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq / n)};
}

inline RepeatSummary summarize(std::vector<RunMetrics> runs) {
  RepeatSummary s;
  std::vector<double> acc;
  for (const auto& r : runs) acc.push_back(r.test_accuracy);
  std::tie(s.mean, s.stddev) = mean_stddev(acc);
  s.runs = std::move(runs);
  return s;
}

using RunCallback = std::function<void(int run, const RunMetrics&, ClassifierModel<double>& trained)>;

// Run i builds its model from, and shuffles with, seed = config.seed + i.
inline RepeatSummary repeat_experiment(const Splits& splits, const TrainConfig& config,
                                       const RunCallback& on_run = {}, const EpochCallback& on_epoch = {}) {
  config.validate();
  std::vector<RunMetrics> runs;
  for (int i = 0; i < config.repeats; ++i) {
    TrainConfig run_cfg = config;
    run_cfg.seed = config.seed + static_cast<std::uint64_t>(i);
    auto model = build_model(run_cfg.seed);
    runs.push_back(train(model, splits, run_cfg, on_epoch));
    if (on_run) on_run(i, runs.back(), model);
  }
  return summarize(std::move(runs));
}

}  // namespace isac::classifier
