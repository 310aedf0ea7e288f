#include "seqbounds/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqbounds {

NormBudget NormBudget::uniform(double value) {
  NormBudget b;
  b.b_x = b.b_w = b.b_wc = b.b_wv = b.b_qk = value;
  b.b_c2 = b.b_v2 = b.b_qk2 = b.l_sigma = value;
  return b;
}

void NormBudget::validate() const {
  for (double v : {b_x, b_w, b_wc, b_wv, b_qk, b_c2, b_v2, b_qk2, l_sigma}) {
    if (!std::isfinite(v) || v < 0.0)
      throw std::invalid_argument("NormBudget: entries must be finite and nonnegative");
  }
}

void BoundQuery::validate() const {
  if (m < 1) throw std::invalid_argument("BoundQuery: m must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("BoundQuery: delta must be in (0,1)");
  if (!(c_dudley > 0.0)) throw std::invalid_argument("BoundQuery: c_dudley must be positive");
  if (!(c_loss >= 0.0)) throw std::invalid_argument("BoundQuery: c_loss must be nonnegative");
  if (!(epsilon > 0.0)) throw std::invalid_argument("BoundQuery: epsilon must be positive");
}

CoveringConstant covering_constant(LemmaId lemma, std::size_t d, std::size_t k, double b_w,
                                   double b_x) {
  if (d < 1 || k < 1) throw std::invalid_argument("covering_constant: d and k must be >= 1");
  const double scale = b_w * b_w * b_x * b_x;
  const double dd = static_cast<double>(d);
  const double kk = static_cast<double>(k);
  switch (lemma) {
    case LemmaId::kL3OneInf: return {dd * scale * std::log(2.0 * kk + 1.0), false};
    case LemmaId::kL4TwoOne: return {scale * std::log(dd * kk), true};
    case LemmaId::kL5OneOne: return {scale * std::log(2.0 * dd * kk + 1.0), false};
  }
  throw std::invalid_argument("covering_constant: unknown lemma");
}

static void check_dudley_inputs(double c_const, double d_const, double range, double m) {
  if (!(range > 0.0)) throw std::invalid_argument("dudley_bound: range B must be positive");
  if (!(c_const >= 0.0) || !(d_const >= 0.0))
    throw std::invalid_argument("dudley_bound: C and D must be nonnegative");
  if (!(m >= 1.0)) throw std::invalid_argument("dudley_bound: m must be >= 1");
}

double dudley_delta(double c_const, double d_const, double range, double m) {
  check_dudley_inputs(c_const, d_const, range, m);
  if (m <= d_const) return range;
  const double delta = std::sqrt(c_const) / (std::sqrt(m) - std::sqrt(d_const));
  return std::min(delta, range);
}

double dudley_bound(double c_const, double d_const, double range, double m, double c) {
  check_dudley_inputs(c_const, d_const, range, m);
  if (m <= d_const) return c * range;
  const double delta = dudley_delta(c_const, d_const, range, m);
  const double flat = (range - delta) * std::sqrt(d_const / m);
  // delta == 0 only when C == 0, where the integral term vanishes.
  const double chained =
      delta > 0.0 ? std::sqrt(c_const / m) * std::max(0.0, std::log(range / delta)) : 0.0;
  return c * (delta + flat + chained);
}

double theorem1_rad_bound(const NormBudget& budget, double c_qk, std::size_t m, std::size_t d,
                          double c) {
  budget.validate();
  if (d < 1) throw std::invalid_argument("theorem1_rad_bound: d must be >= 1");
  const double mm = static_cast<double>(m);
  const double log2d = std::log(2.0 * static_cast<double>(d));
  if (!(m > d) || !(mm > log2d))
    throw std::invalid_argument("theorem1_rad_bound: requires m > d and m > ln(2d)");
  if (!(c_qk >= 0.0)) throw std::invalid_argument("theorem1_rad_bound: C_qk must be nonnegative");
  const double prefactor = 2.0 * budget.b_w * budget.b_wc * budget.l_sigma * budget.b_wv;
  if (prefactor == 0.0) return 0.0;
  if (!(budget.b_x > 0.0)) return 0.0;  // every input is zero
  const double bx2 = budget.b_x * budget.b_x;
  return prefactor * dudley_bound(4.0 * bx2 * bx2 * c_qk, log2d, budget.b_x, mm, c);
}

double multihead_scale(double single_head_bound, std::size_t heads) {
  return static_cast<double>(heads) * single_head_bound;
}

double gen_gap_bound(double rad, double c_loss, double delta, std::size_t m) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("gen_gap_bound: delta must be in (0,1)");
  if (m < 1) throw std::invalid_argument("gen_gap_bound: m must be >= 1");
  return 2.0 * rad + 4.0 * c_loss * std::sqrt(2.0 * std::log(4.0 / delta) / static_cast<double>(m));
}

EpsilonAllocation allocate_epsilons(std::span<const double> c, std::span<const double> beta,
                                    double eps) {
  if (c.size() != beta.size()) throw std::invalid_argument("allocate_epsilons: length mismatch");
  if (c.empty()) throw std::invalid_argument("allocate_epsilons: empty input");
  if (!(eps > 0.0)) throw std::invalid_argument("allocate_epsilons: eps must be positive");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0.0) || !(beta[i] > 0.0))
      throw std::invalid_argument("allocate_epsilons: C_i and beta_i must be positive");
  }
  EpsilonAllocation out;
  for (std::size_t i = 0; i < c.size(); ++i) out.gamma += std::cbrt(c[i]) * std::cbrt(beta[i] * beta[i]);
  out.eps.resize(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) out.eps[i] = eps / out.gamma * std::cbrt(c[i] / beta[i]);
  out.min_value = out.gamma * out.gamma * out.gamma / (eps * eps);
  return out;
}

MultiLayerReport theorem2_constant(std::size_t layers, const NormBudget& budget, double c_1,
                                   double c_bx) {
  if (layers < 1) throw std::invalid_argument("theorem2_constant: need at least one layer");
  budget.validate();
  if (!(c_1 >= 0.0) || !(c_bx >= 0.0))
    throw std::invalid_argument("theorem2_constant: covering constants must be nonnegative");

  const double ls = budget.l_sigma;
  const double growth = ls * budget.b_c2 * budget.b_v2 * (1.0 + 4.0 * budget.b_qk2);
  const auto p23 = [](double x) { return std::cbrt(x * x); };

  MultiLayerReport r;
  r.alpha.assign(layers, 1.0);
  // alpha_i = prod_{j=i+1}^{L} growth; alpha_L is the empty product.
  for (std::size_t i = layers - 1; i-- > 0;) r.alpha[i] = r.alpha[i + 1] * growth;
  r.tau.resize(layers);
  for (std::size_t i = 0; i < layers; ++i) {
    const double a = r.alpha[i];
    r.tau[i] = p23(a) + p23(2.0 * a * ls * budget.b_c2 * budget.b_v2) + p23(a * ls * budget.b_v2);
  }
  r.gamma = std::cbrt(c_bx) * p23(2.0 * ls * budget.b_c2 * budget.b_v2 * r.alpha[0] * budget.b_w) +
            std::cbrt(c_1) * (1.0 + p23(budget.b_w * ls * budget.b_v2));
  double tail = 0.0;
  for (std::size_t i = 1; i < layers; ++i) tail += r.tau[i];
  r.eta = std::cbrt(c_1) * p23(budget.b_w) * tail;
  const double total = r.gamma + r.eta;
  r.c_total = total * total * total;
  return r;
}

double masked_vocab_bound(double scalar_rad_bound, std::size_t vocab) {
  if (vocab < 1) throw std::invalid_argument("masked_vocab_bound: K must be >= 1");
  return std::sqrt(static_cast<double>(vocab)) * scalar_rad_bound;
}

}  // namespace seqbounds
