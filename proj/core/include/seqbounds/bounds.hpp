#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "seqbounds/covering.hpp"

namespace seqbounds {

/// Norm budgets of the transformer classes.
///
/// Single-layer budgets: ||w||_1 <= b_w, ||W_c^T||_{1,inf} <= b_wc,
/// ||W_v^T||_{1,inf} <= b_wv, and b_qk for W_QK in the chosen lemma's norm.
/// Multi-layer budgets are 2-operator norms: b_c2, b_v2, b_qk2.
struct NormBudget {
  double b_x = 1.0;
  double b_w = 1.0;
  double b_wc = 1.0;
  double b_wv = 1.0;
  double b_qk = 1.0;
  double b_c2 = 1.0;
  double b_v2 = 1.0;
  double b_qk2 = 1.0;
  double l_sigma = 1.0;

  static NormBudget uniform(double value);
  /// Throws std::invalid_argument if any entry is negative or non-finite.
  void validate() const;
};

/// Sample-level parameters shared by the Rademacher and generalization bounds.
struct BoundQuery {
  std::size_t m = 1;
  double delta = 0.05;
  double c_dudley = 1.0;
  double c_loss = 1.0;
  double epsilon = 1.0;

  void validate() const;
};

struct CoveringConstant {
  double value = 0.0;        // C such that log N <= C / eps^2 (natural log)
  bool approximate = false;  // hidden logarithmic factor set to 1
};

/// eps-free constant of the lemma's log covering number bound.
///   L3: d B_w^2 B_x^2 ln(2k+1);  L4: B_w^2 B_x^2 ln(dk) (approximate);  L5: B_w^2 B_x^2 ln(2dk+1).
CoveringConstant covering_constant(LemmaId lemma, std::size_t d, std::size_t k, double b_w,
                                   double b_x);

/// Dudley entropy bound for log N(eps) = D + C / eps^2 on a class with range B:
///   c [delta + (B - delta) sqrt(D/m) + sqrt(C/m) ln(B/delta)]
/// at delta = min(sqrt(C) / (sqrt(m) - sqrt(D)), B). When m <= D the bound is c B.
double dudley_bound(double c_const, double d_const, double range, double m, double c);
/// The minimizing delta used by dudley_bound (B when m <= D).
double dudley_delta(double c_const, double d_const, double range, double m);

/// Single-layer Rademacher bound:
///   2 B_w B_Wc L_sigma B_Wv * dudley_bound(4 B_x^4 C_qk, ln(2d), B_x, m, c).
/// Requires m > d and m > ln(2d).
double theorem1_rad_bound(const NormBudget& budget, double c_qk, std::size_t m, std::size_t d,
                          double c);

/// H heads contribute linearly.
double multihead_scale(double single_head_bound, std::size_t heads);

/// 2 rad + 4 c_loss sqrt(2 ln(4/delta) / m)
double gen_gap_bound(double rad, double c_loss, double delta, std::size_t m);

struct EpsilonAllocation {
  std::vector<double> eps;
  double gamma = 0.0;
  double min_value = 0.0;  // gamma^3 / eps^2
};

/// Minimizes sum_i C_i / eps_i^2 subject to sum_i beta_i eps_i = eps.
EpsilonAllocation allocate_epsilons(std::span<const double> c, std::span<const double> beta,
                                    double eps);

struct MultiLayerReport {
  std::vector<double> alpha;  // alpha_1..alpha_L
  std::vector<double> tau;    // tau_1..tau_L (tau_1 is reported but unused by eta)
  double gamma = 0.0;
  double eta = 0.0;
  double c_total = 0.0;  // (gamma + eta)^3
};

/// Log covering constant of the L-layer scalar transformer, given the unit-input
/// covering constant c_1 and the B_x-input constant c_bx.
MultiLayerReport theorem2_constant(std::size_t layers, const NormBudget& budget, double c_1,
                                   double c_bx);

/// sqrt(K) times a scalar Rademacher bound (polylog factor taken as 1).
double masked_vocab_bound(double scalar_rad_bound, std::size_t vocab);

}  // namespace seqbounds
