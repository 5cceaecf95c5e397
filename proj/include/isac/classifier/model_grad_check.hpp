#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "isac/classifier/model.hpp"
#include "isac/nn/grad_check.hpp"
#include "isac/nn/loss.hpp"

namespace isac::classifier {

struct ModelGradCheck {
  nn::GradCheckReport report;
  // Coordinates re-measured on the extended-precision clone.
  std::size_t refined = 0;
  // Conv biases feed straight into train-mode batchnorm, which subtracts the
  // per-channel mean, so the loss is constant along them. They are checked
  // for that invariance (both gradients ~0) instead of by relative error.
  double max_invariant_abs_grad = 0.0;
};

// Train-mode cross-entropy gradient check of every parameter tensor and the
// input batch against central differences.
//
// A double-precision loss near 2 carries ~4e-16 rounding, i.e. ~2e-11 noise in a
// difference quotient with h = 1e-5, which swamps input gradients of order
// 1e-7. Any coordinate whose double estimate deviates by more than
// `refine_above` is therefore re-measured on a long double copy of the model,
// perturbed to the same values. Stencils crossing a relu/maxpool kink are
// skipped and counted.
inline ModelGradCheck check_model_gradients(ClassifierModel<double>& model, Tensor<double> batch,
                                            std::span<const int> labels, const nn::GradCheckOptions& options,
                                            double refine_above = 1e-7) {
  const auto saved = model.snapshot();
  auto logits = model.forward(batch, Mode::train);
  auto loss = nn::softmax_cross_entropy(logits, labels);
  auto grad_input = model.backward(loss.grad_logits, true);
  const std::uint64_t base_sig = model.activation_signature();

  auto precise = model.cast<long double>();
  auto batch_ld = batch.cast<long double>();

  auto params = model.params();
  auto params_ld = precise.params();
  struct Target {
    std::string name;
    std::span<double> values;
    std::span<long double> values_ld;
    std::vector<double> analytic;
    bool invariant;
  };
  std::vector<Target> targets;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const bool conv_bias = params[i].name.rfind("conv", 0) == 0 && params[i].name.ends_with(".bias");
    targets.push_back({params[i].name, params[i].value->data(), params_ld[i].value->data(),
                       {params[i].grad->data().begin(), params[i].grad->data().end()}, conv_bias});
  }
  targets.push_back({"input", batch.data(), batch_ld.data(), {grad_input.data().begin(), grad_input.data().end()},
                     false});

  auto eval = [&] { return nn::softmax_cross_entropy(model.forward(batch, Mode::train), labels).loss; };
  auto eval_ld = [&] {
    return nn::softmax_cross_entropy(precise.forward(batch_ld, Mode::train), labels).loss;
  };

  ModelGradCheck out;
  std::mt19937_64 rng(options.seed);
  const double h = options.perturbation;
  for (auto& t : targets) {
    std::vector<std::size_t> idx(t.values.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (!t.invariant && options.max_per_probe > 0 && idx.size() > options.max_per_probe) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(options.max_per_probe);
      std::sort(idx.begin(), idx.end());
    }
    for (auto i : idx) {
      const double saved_v = t.values[i];
      const double hi = saved_v + h, lo = saved_v - h;
      t.values[i] = hi;
      const double up = eval();
      const bool up_same = model.activation_signature() == base_sig;
      t.values[i] = lo;
      const double down = eval();
      const bool down_same = model.activation_signature() == base_sig;
      t.values[i] = saved_v;
      double numeric = (up - down) / (hi - lo);

      if (t.invariant) {
        out.max_invariant_abs_grad = std::max({out.max_invariant_abs_grad, std::abs(numeric), std::abs(t.analytic[i])});
        continue;
      }
      if (!up_same || !down_same) {
        ++out.report.kink_skips;
        continue;
      }
      double err = nn::relative_error(t.analytic[i], numeric);
      if (err > refine_above) {
        const long double saved_ld = t.values_ld[i];
        t.values_ld[i] = hi;
        const long double up_ld = eval_ld();
        t.values_ld[i] = lo;
        const long double down_ld = eval_ld();
        t.values_ld[i] = saved_ld;
        numeric = static_cast<double>((up_ld - down_ld) /
                                      (static_cast<long double>(hi) - static_cast<long double>(lo)));
        err = nn::relative_error(t.analytic[i], numeric);
        ++out.refined;
      }
      ++out.report.coordinates_checked;
      if (err > out.report.max_relative_error) {
        out.report.max_relative_error = err;
        out.report.worst_probe = t.name;
        out.report.worst_index = i;
        out.report.worst_analytic = t.analytic[i];
        out.report.worst_numeric = numeric;
      }
    }
  }
  model.restore(saved);
  return out;
}

}  // namespace isac::classifier
