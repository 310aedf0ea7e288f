#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "seqbounds/bounds.hpp"
#include "seqbounds/covering.hpp"
#include "seqbounds/transformer.hpp"

namespace seqbounds {

/// Finite hypothesis class given by its values: table(h, i) = h(x_i).
struct FiniteClass {
  Matrix table;  // n_hypotheses x m
};

/// Norm-constrained transformers. Budgets used: b_w on ||w||_1, b_wc and b_wv
/// on the largest row l1 norm of W_c and W_v (i.e. ||W_c^T||_{1,inf},
/// ||W_v^T||_{1,inf}), and b_qk on the map x_[CLS] -> W_QK^T x_[CLS] in the
/// norm of `qk_lemma`.
struct TransformerClass {
  ModelConfig config;
  NormBudget budget;
  LemmaId qk_lemma = LemmaId::kL3OneInf;
};

struct ClassSpec {
  std::variant<FiniteClass, TransformerClass> kind;

  /// Throws std::invalid_argument for an empty table, or a transformer class
  /// with a nonpositive budget.
  void validate() const;
};

struct AscentOptions {
  std::size_t steps = 500;
  std::size_t restarts = 5;
  double learning_rate = 0.05;
};

struct RademacherEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  std::vector<double> trial_values;  // sup for each sign vector, in trial order
};

/// Monte-Carlo estimate of (1/m) E_sigma sup_h sum_i sigma_i h(x_i).
///
/// The finite kind takes the exact max over the table (`data` is ignored). The
/// transformer kind runs projected Adam ascent from several feasible starts
/// and keeps the best value, so each trial is a lower bound on the true sup.
/// Trials are seeded by index; `threads` only changes wall time, never results.
RademacherEstimate empirical_rademacher(const ClassSpec& spec, std::span<const Matrix> data,
                                        std::size_t n_sigma, std::uint64_t seed,
                                        const AscentOptions& ascent = {}, std::size_t threads = 1);

/// Exact value by enumerating all 2^m sign vectors (m <= 15).
double exact_rademacher_finite(const Matrix& table);

/// Euclidean projection of every parameter block onto its budget ball.
void project_to_budget(TransformerParams& params, const TransformerClass& cls);

/// (1/m) sum_i signs_i f(X_i)
double correlation(const TransformerParams& params, const ModelConfig& config,
                   std::span<const Matrix> data, std::span<const double> signs);

/// Best correlation found by projected ascent for one sign vector.
double transformer_sup(const TransformerClass& cls, std::span<const Matrix> data,
                       std::span<const double> signs, std::uint64_t seed,
                       const AscentOptions& ascent = {});

/// Best correlation over `draws` random feasible parameter sets.
double random_search_sup(const TransformerClass& cls, std::span<const Matrix> data,
                         std::span<const double> signs, std::size_t draws, std::uint64_t seed);

/// Random feasible parameters: a seeded initialization, rescaled by a random
/// factor and projected onto the budget.
TransformerParams random_feasible_params(const TransformerClass& cls, std::uint64_t seed);

/// m inputs of shape (T+1) x d whose rows are uniform on the sphere of radius b_x.
std::vector<Matrix> random_sphere_inputs(std::size_t m, std::size_t seq_len, std::size_t d, double b_x,
                                         std::uint64_t seed);

/// Rademacher signs for trial `trial` under `seed`.
std::vector<double> rademacher_signs(std::size_t m, std::uint64_t seed, std::size_t trial);

}  // namespace seqbounds
