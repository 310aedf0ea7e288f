#include "seqbounds/rademacher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

#include "seqbounds/seeding.hpp"

namespace seqbounds {

void ClassSpec::validate() const {
  if (const auto* f = std::get_if<FiniteClass>(&kind)) {
    if (f->table.empty()) throw std::invalid_argument("ClassSpec: empty value table");
    return;
  }
  const auto& t = std::get<TransformerClass>(kind);
  t.config.validate();
  t.budget.validate();
  const auto& b = t.budget;
  if (!(b.b_w > 0.0 && b.b_wc > 0.0 && b.b_wv > 0.0 && b.b_qk > 0.0))
    throw std::invalid_argument("ClassSpec: transformer budgets must be positive");
}

std::vector<double> rademacher_signs(std::size_t m, std::uint64_t seed, std::size_t trial) {
  std::mt19937_64 rng(derive_seed(seed, {trial}));
  std::vector<double> s(m);
  for (double& x : s) x = (rng() >> 63) ? 1.0 : -1.0;
  return s;
}

std::vector<Matrix> random_sphere_inputs(std::size_t m, std::size_t seq_len, std::size_t d, double b_x,
                                         std::uint64_t seed) {
  if (d == 0) throw std::invalid_argument("random_sphere_inputs: d must be positive");
  if (!(b_x >= 0.0)) throw std::invalid_argument("random_sphere_inputs: B_x must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Matrix> out;
  out.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    Matrix x(seq_len + 1, d);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      auto row = x.row(r);
      double n2 = 0.0;
      while (n2 == 0.0) {
        n2 = 0.0;
        for (double& v : row) {
          v = normal(rng);
          n2 += v * v;
        }
      }
      const double s = b_x / std::sqrt(n2);
      for (double& v : row) v *= s;
    }
    out.push_back(std::move(x));
  }
  return out;
}

double exact_rademacher_finite(const Matrix& table) {
  if (table.empty()) throw std::invalid_argument("exact_rademacher_finite: empty table");
  const std::size_t m = table.cols();
  if (m > 15) throw std::invalid_argument("exact_rademacher_finite: m must be <= 15");
  const std::size_t patterns = std::size_t{1} << m;
  double total = 0.0;
  for (std::size_t bits = 0; bits < patterns; ++bits) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < table.rows(); ++h) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += ((bits >> i) & 1u ? 1.0 : -1.0) * table(h, i);
      best = std::max(best, s);
    }
    total += best;
  }
  return total / (static_cast<double>(patterns) * static_cast<double>(m));
}

void project_to_budget(TransformerParams& params, const TransformerClass& cls) {
  const auto& b = cls.budget;
  project_l1_ball_inplace(params.readout, b.b_w);
  for (auto& layer : params.layers) {
    for (auto& h : layer.heads) {
      project_rows_l1_inplace(h.w_c, b.b_wc);
      project_rows_l1_inplace(h.w_v, b.b_wv);
      // The constrained map is W_QK^T, so its columns are the rows of W_QK.
      switch (cls.qk_lemma) {
        case LemmaId::kL3OneInf:
          project_rows_l1_inplace(h.w_qk, b.b_qk);
          break;
        case LemmaId::kL4TwoOne: {
          Matrix t = h.w_qk.transpose();
          project_group_l21_inplace(t, b.b_qk);
          h.w_qk = t.transpose();
          break;
        }
        case LemmaId::kL5OneOne:
          project_l1_ball_inplace(h.w_qk.data(), b.b_qk);
          break;
      }
    }
  }
}

double correlation(const TransformerParams& params, const ModelConfig& config,
                   std::span<const Matrix> data, std::span<const double> signs) {
  if (data.size() != signs.size() || data.empty())
    throw std::invalid_argument("correlation: need one sign per input");
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) s += signs[i] * forward_scalar(data[i], params, config);
  return s / static_cast<double>(data.size());
}

TransformerParams random_feasible_params(const TransformerClass& cls, std::uint64_t seed) {
  ModelConfig cfg = cls.config;
  cfg.seed = seed;
  auto p = init_params(cfg);
  std::mt19937_64 rng(splitmix64(seed));
  // Spread draws from the interior out past the budget boundary.
  const double scale = std::uniform_real_distribution<double>(0.0, 4.0)(rng);
  p.for_each_value([&](double& x) { x *= scale; });
  project_to_budget(p, cls);
  return p;
}

double transformer_sup(const TransformerClass& cls, std::span<const Matrix> data,
                       std::span<const double> signs, std::uint64_t seed,
                       const AscentOptions& ascent) {
  if (data.size() != signs.size() || data.empty())
    throw std::invalid_argument("transformer_sup: need one sign per input");
  const double inv_m = 1.0 / static_cast<double>(data.size());
  double best = -std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0; restart < std::max<std::size_t>(ascent.restarts, 1); ++restart) {
    auto params = random_feasible_params(cls, derive_seed(seed, {restart}));
    const std::size_t n = params.parameter_count();
    std::vector<double> m1(n, 0.0), m2(n, 0.0), g(n);
    for (std::size_t step = 1; step <= ascent.steps + 1; ++step) {
      auto grad = TransformerParams::zeros(cls.config);
      double value = 0.0;
      for (std::size_t i = 0; i < data.size(); ++i)
        value += signs[i] * inv_m * forward_backward(data[i], params, cls.config, signs[i] * inv_m, grad);
      best = std::max(best, value);
      if (step > ascent.steps) break;

      std::size_t idx = 0;
      grad.for_each_value([&](double x) { g[idx++] = x; });
      const double c1 = 1.0 - std::pow(0.9, static_cast<double>(step));
      const double c2 = 1.0 - std::pow(0.999, static_cast<double>(step));
      idx = 0;
      params.for_each_value([&](double& w) {
        m1[idx] = 0.9 * m1[idx] + 0.1 * g[idx];
        m2[idx] = 0.999 * m2[idx] + 0.001 * g[idx] * g[idx];
        w += ascent.learning_rate * (m1[idx] / c1) / (std::sqrt(m2[idx] / c2) + 1e-12);
        ++idx;
      });
      project_to_budget(params, cls);
    }
  }
  return best;
}

double random_search_sup(const TransformerClass& cls, std::span<const Matrix> data,
                         std::span<const double> signs, std::size_t draws, std::uint64_t seed) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < draws; ++i) {
    const auto p = random_feasible_params(cls, derive_seed(seed, {0xd1a5, i}));
    best = std::max(best, correlation(p, cls.config, data, signs));
  }
  return best;
}

RademacherEstimate empirical_rademacher(const ClassSpec& spec, std::span<const Matrix> data,
                                        std::size_t n_sigma, std::uint64_t seed,
                                        const AscentOptions& ascent, std::size_t threads) {
  spec.validate();
  if (n_sigma < 2) throw std::invalid_argument("empirical_rademacher: n_sigma must be >= 2");

  const auto* finite = std::get_if<FiniteClass>(&spec.kind);
  const std::size_t m = finite ? finite->table.cols() : data.size();
  if (m == 0) throw std::invalid_argument("empirical_rademacher: no data");
  if (!finite) {
    const auto& cfg = std::get<TransformerClass>(spec.kind).config;
    for (const auto& x : data) {
      if (x.rows() != cfg.seq_len + 1 || x.cols() != cfg.d)
        throw std::invalid_argument("empirical_rademacher: input shape does not match the model");
    }
  }

  RademacherEstimate out;
  out.trial_values.assign(n_sigma, 0.0);
  auto run_trial = [&](std::size_t trial) {
    const auto signs = rademacher_signs(m, seed, trial);
    if (finite) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t h = 0; h < finite->table.rows(); ++h)
        best = std::max(best, dot(signs, finite->table.row(h)));
      out.trial_values[trial] = best / static_cast<double>(m);
    } else {
      out.trial_values[trial] = transformer_sup(std::get<TransformerClass>(spec.kind), data, signs,
                                                derive_seed(seed, {0xa5c3, trial}), ascent);
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(threads, 1, n_sigma);
  if (workers == 1) {
    for (std::size_t t = 0; t < n_sigma; ++t) run_trial(t);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n_sigma; t += workers) run_trial(t);
      });
    }
    for (auto& th : pool) th.join();
  }

  // Ordered reduction keeps the result independent of scheduling.
  double sum = 0.0;
  for (double v : out.trial_values) sum += v;
  const double n = static_cast<double>(n_sigma);
  out.estimate = sum / n;
  double ss = 0.0;
  for (double v : out.trial_values) ss += (v - out.estimate) * (v - out.estimate);
  out.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return out;
}

}  // namespace seqbounds
