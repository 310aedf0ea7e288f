#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "seqbounds/transformer.hpp"

namespace seqbounds::testing {

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients of the scalar output against central
/// differences. Relative error uses max(|a|, |n|, floor) as denominator.
inline GradCheck check_gradient(const Matrix& x, const TransformerParams& params, const ModelConfig& config,
                                double h = 1e-6, double floor = 1e-6) {
  auto grad = TransformerParams::zeros(config);
  forward_backward(x, params, config, 1.0, grad);
  std::vector<double> analytic;
  grad.for_each_value([&](double g) { analytic.push_back(g); });

  GradCheck out;
  TransformerParams p = params;
  std::vector<double*> slots;
  p.for_each_value([&](double& w) { slots.push_back(&w); });
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + h;
    const double plus = forward_scalar(x, p, config);
    *slots[i] = saved - h;
    const double minus = forward_scalar(x, p, config);
    *slots[i] = saved;
    const double numeric = (plus - minus) / (2.0 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(analytic[i] - numeric) / denom);
    ++out.checked;
  }
  return out;
}

inline Matrix random_input(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix x(rows, cols);
  for (double& v : x.data()) v = n(rng);
  return x;
}

}  // namespace seqbounds::testing
