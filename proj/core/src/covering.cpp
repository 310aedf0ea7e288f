#include "seqbounds/covering.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <random>

namespace seqbounds {

std::string to_string(LemmaId id) {
  switch (id) {
    case LemmaId::kL3OneInf: return "L3_1inf";
    case LemmaId::kL4TwoOne: return "L4_21";
    case LemmaId::kL5OneOne: return "L5_11";
  }
  return "unknown";
}

LemmaId parse_lemma_id(const std::string& s) {
  if (s == "L3" || s == "L3_1inf") return LemmaId::kL3OneInf;
  if (s == "L4" || s == "L4_21") return LemmaId::kL4TwoOne;
  if (s == "L5" || s == "L5_11") return LemmaId::kL5OneOne;
  throw std::invalid_argument("unknown lemma id '" + s + "' (expected L3, L4 or L5)");
}

NormKind lemma_matrix_norm(LemmaId id) {
  switch (id) {
    case LemmaId::kL3OneInf: return NormKind::qp(Exponent{1.0}, Exponent::infinity());
    case LemmaId::kL4TwoOne: return NormKind::qp(Exponent{2.0}, Exponent{1.0});
    case LemmaId::kL5OneOne: return NormKind::qp(Exponent{1.0}, Exponent{1.0});
  }
  throw std::invalid_argument("lemma_matrix_norm: unknown lemma");
}

double Cover::log_size() const {
  if (points.empty()) throw std::invalid_argument("Cover::log_size: empty cover");
  return std::log(static_cast<double>(points.size()));
}

void Cover::validate() const {
  if (!(epsilon > 0.0)) throw std::invalid_argument("Cover: epsilon must be positive");
  for (const auto& p : points) {
    if (p.rows() != rows() || p.cols() != cols())
      throw std::invalid_argument("Cover: points do not share one shape");
  }
}

// ---------------------------------------------------------------------------
// Maurey sparsification
// ---------------------------------------------------------------------------

namespace {

struct MaureyProblem {
  std::span<const double> alpha;
  const Matrix& v;
  double gamma = 0.0;
  std::vector<double> f;
};

double approximation_error_sq(const MaureyProblem& p, std::span<const std::size_t> counts,
                              std::size_t k) {
  const std::size_t dim = p.v.rows();
  double err = 0.0;
  for (std::size_t r = 0; r < dim; ++r) {
    double approx = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i)
      approx += static_cast<double>(counts[i]) * p.v(r, i);
    approx *= p.gamma / static_cast<double>(k);
    const double diff = p.f[r] - approx;
    err += diff * diff;
  }
  return err;
}

// Visits every composition of `total` into `parts` nonnegative integers.
void for_each_composition(std::size_t parts, std::size_t total,
                          const std::function<void(std::span<const std::size_t>)>& visit) {
  std::vector<std::size_t> c(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      c[i] = left;
      visit(c);
      return;
    }
    for (std::size_t x = 0; x <= left; ++x) {
      c[i] = x;
      rec(i + 1, left - x);
    }
  };
  rec(0, total);
}

MaureyProblem make_problem(std::span<const double> alpha, const Matrix& v) {
  MaureyProblem p{alpha, v, 0.0, std::vector<double>(v.rows(), 0.0)};
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    p.gamma += alpha[i];
    for (std::size_t r = 0; r < v.rows(); ++r) p.f[r] += alpha[i] * v(r, i);
  }
  return p;
}

}  // namespace

double maurey_error_sq(std::span<const double> alpha, const Matrix& v,
                       std::span<const std::size_t> counts) {
  if (alpha.size() != v.cols() || counts.size() != v.cols())
    throw std::invalid_argument("maurey_error_sq: size mismatch");
  const std::size_t k = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
  auto p = make_problem(alpha, v);
  if (k == 0) return dot(p.f, p.f);
  return approximation_error_sq(p, counts, k);
}

MaureyResult maurey_sparsify(std::span<const double> alpha, const Matrix& v, double b,
                             std::size_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("maurey_sparsify: k must be positive");
  if (alpha.empty() || alpha.size() != v.cols())
    throw std::invalid_argument("maurey_sparsify: need one weight per column of V");
  if (!(b >= 0.0)) throw std::invalid_argument("maurey_sparsify: b must be nonnegative");
  double sum = 0.0;
  for (double a : alpha) {
    if (!(a >= 0.0)) throw std::invalid_argument("maurey_sparsify: negative weight");
    sum += a;
  }
  if (sum > 1.0 + 1e-12) throw std::invalid_argument("maurey_sparsify: weights sum above 1");
  for (std::size_t c = 0; c < v.cols(); ++c) {
    if (vector_norm(v.column(c), Exponent{2.0}) > b * (1.0 + 1e-12))
      throw std::invalid_argument("maurey_sparsify: column norm exceeds b");
  }

  const std::size_t d = alpha.size();
  auto problem = make_problem(alpha, v);
  MaureyResult result;
  result.counts.assign(d, 0);
  const double f_sq = dot(problem.f, problem.f);
  result.bound = (problem.gamma * problem.gamma * b * b - f_sq) / static_cast<double>(k);
  if (problem.gamma == 0.0) return result;  // f = 0, the empty combination is exact

  const double tol = 1e-12 * std::max(1.0, problem.gamma * problem.gamma * b * b);
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(alpha.begin(), alpha.end());
  std::vector<std::size_t> counts(d);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t draw = 0; draw < k; ++draw) ++counts[pick(rng)];
    const double err = approximation_error_sq(problem, counts, k);
    if (err <= result.bound + tol) {
      result.counts = counts;
      result.error_sq = err;
      return result;
    }
  }

  if (d * k > 12)
    throw std::runtime_error("maurey_sparsify: sampling failed and problem too large to enumerate");
  double best = std::numeric_limits<double>::infinity();
  for_each_composition(d, k, [&](std::span<const std::size_t> c) {
    const double err = approximation_error_sq(problem, c, k);
    if (err < best) {
      best = err;
      result.counts.assign(c.begin(), c.end());
    }
  });
  if (best > result.bound + tol)
    throw std::runtime_error("maurey_sparsify: no composition meets the bound");
  result.error_sq = best;
  result.enumerated = true;
  return result;
}

// ---------------------------------------------------------------------------
// Explicit covers
// ---------------------------------------------------------------------------

std::size_t maurey_sparsity(double b_w, double b_x, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (!(b_w >= 0.0) || !(b_x >= 0.0)) throw std::invalid_argument("budgets must be nonnegative");
  const double ratio = b_w * b_x / epsilon;
  if (ratio < 1.0) return 0;
  // Guard against 4.0000000001 style rounding before taking the ceiling.
  const double x = ratio * ratio;
  const double nearest = std::round(x);
  if (std::abs(x - nearest) <= 1e-9 * std::max(1.0, x)) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(x));
}

double l1_lattice_count(std::size_t n, std::size_t budget) {
  // sum_j 2^j C(n, j) C(budget, j)
  double total = 0.0;
  double c_n = 1.0, c_b = 1.0, pow2 = 1.0;
  for (std::size_t j = 0; j <= std::min(n, budget); ++j) {
    if (j > 0) {
      c_n = c_n * static_cast<double>(n - j + 1) / static_cast<double>(j);
      c_b = c_b * static_cast<double>(budget - j + 1) / static_cast<double>(j);
      pow2 *= 2.0;
    }
    total += pow2 * c_n * c_b;
  }
  return total;
}

namespace {

// All z in Z^n with ||z||_1 <= budget, scaled by `scale`.
std::vector<std::vector<double>> l1_lattice(std::size_t n, std::size_t budget, double scale) {
  std::vector<std::vector<double>> out;
  std::vector<double> z(n, 0.0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i == n) {
      out.push_back(z);
      return;
    }
    const auto l = static_cast<long>(left);
    for (long x = -l; x <= l; ++x) {
      z[i] = static_cast<double>(x) * scale;
      rec(i + 1, left - static_cast<std::size_t>(std::labs(x)));
    }
    z[i] = 0.0;
  };
  rec(0, budget);
  return out;
}

}  // namespace

Cover build_cover(LemmaId lemma, std::size_t d, std::size_t k, double b_w, double b_x,
                  double epsilon) {
  if (lemma == LemmaId::kL4TwoOne) {
    throw NonConstructiveError(
        "L4 (2,1)-norm cover is non-constructive; only its size bound is available "
        "(see covering_constant)");
  }
  if (d == 0 || k == 0) throw std::invalid_argument("build_cover: d and k must be positive");
  if (!(b_x > 0.0)) throw std::invalid_argument("build_cover: B_x must be positive");
  const std::size_t sparsity = maurey_sparsity(b_w, b_x, epsilon);
  const double scale = sparsity == 0 ? 0.0 : b_w / static_cast<double>(sparsity);

  Cover cover;
  cover.epsilon = epsilon;
  cover.eval_norm = Exponent{2.0};
  cover.basis_scale = b_x;

  if (lemma == LemmaId::kL3OneInf) {
    const double per_column = l1_lattice_count(k, sparsity);
    if (std::pow(per_column, static_cast<double>(d)) > kMaxCoverPoints)
      throw std::length_error("build_cover: cover would exceed the point limit");
    const auto columns = l1_lattice(k, sparsity, scale);
    const std::size_t s = columns.size();
    std::size_t total = 1;
    for (std::size_t i = 0; i < d; ++i) total *= s;
    cover.points.reserve(total);
    std::vector<std::size_t> digit(d, 0);
    for (std::size_t n = 0; n < total; ++n) {
      Matrix w(k, d);
      for (std::size_t c = 0; c < d; ++c)
        for (std::size_t r = 0; r < k; ++r) w(r, c) = columns[digit[c]][r];
      cover.points.push_back(std::move(w));
      for (std::size_t c = 0; c < d && ++digit[c] == s; ++c) digit[c] = 0;
    }
    return cover;
  }

  // L5: cover of the flattened l1 ball in R^{kd}.
  if (l1_lattice_count(k * d, sparsity) > kMaxCoverPoints)
    throw std::length_error("build_cover: cover would exceed the point limit");
  for (auto& flat : l1_lattice(k * d, sparsity, scale)) cover.points.emplace_back(k, d, std::move(flat));
  return cover;
}

Cover lift_scalar_cover(const ScalarCover& scalar, std::size_t k, Exponent q) {
  if (scalar.vectors.empty()) throw std::invalid_argument("lift_scalar_cover: empty scalar cover");
  if (k == 0) throw std::invalid_argument("lift_scalar_cover: k must be positive");
  const std::size_t d = scalar.vectors.front().size();
  for (const auto& v : scalar.vectors)
    if (v.size() != d) throw std::invalid_argument("lift_scalar_cover: ragged scalar cover");
  const std::size_t s = scalar.vectors.size();
  if (std::pow(static_cast<double>(s), static_cast<double>(k)) > kMaxCoverPoints)
    throw std::length_error("lift_scalar_cover: cover would exceed the point limit");

  Cover cover;
  const double growth = q.is_infinite() ? 1.0 : std::pow(static_cast<double>(k), 1.0 / q.value());
  cover.epsilon = growth * scalar.epsilon;
  cover.eval_norm = q;
  cover.basis_scale = scalar.basis_scale;
  std::size_t total = 1;
  for (std::size_t i = 0; i < k; ++i) total *= s;
  std::vector<std::size_t> digit(k, 0);
  for (std::size_t n = 0; n < total; ++n) {
    Matrix w(k, d);
    for (std::size_t r = 0; r < k; ++r) {
      const auto& src = scalar.vectors[digit[r]];
      std::copy(src.begin(), src.end(), w.row(r).begin());
    }
    cover.points.push_back(std::move(w));
    for (std::size_t r = 0; r < k && ++digit[r] == s; ++r) digit[r] = 0;
  }
  return cover;
}

double basis_deviation(const Matrix& w, const Matrix& w_hat, double b_x, Exponent q) {
  if (w.rows() != w_hat.rows() || w.cols() != w_hat.cols())
    throw std::invalid_argument("basis_deviation: shape mismatch");
  double worst = 0.0;
  std::vector<double> diff(w.rows());
  for (std::size_t c = 0; c < w.cols(); ++c) {
    for (std::size_t r = 0; r < w.rows(); ++r) diff[r] = (w(r, c) - w_hat(r, c)) * b_x;
    worst = std::max(worst, vector_norm(diff, q));
  }
  return worst;
}

double input_deviation(const Matrix& w, const Matrix& w_hat,
                       std::span<const std::vector<double>> inputs, Exponent q) {
  const Matrix delta = w - w_hat;
  double worst = 0.0;
  for (const auto& x : inputs) worst = std::max(worst, vector_norm(matvec(delta, x), q));
  return worst;
}

Matrix random_budget_matrix(LemmaId lemma, std::size_t d, std::size_t k, double b_w,
                            std::uint64_t seed) {
  if (d == 0 || k == 0) throw std::invalid_argument("random_budget_matrix: d and k must be positive");
  if (!(b_w >= 0.0)) throw std::invalid_argument("random_budget_matrix: B_w must be nonnegative");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit;
  Matrix w(k, d);
  for (double& x : w.data()) x = normal(rng);
  const double radius = b_w * (unit(rng) < 0.5 ? 1.0 : unit(rng));

  auto rescale = [](std::span<double> v, double current, double target) {
    if (current > 0.0)
      for (double& x : v) x *= target / current;
  };
  switch (lemma) {
    case LemmaId::kL3OneInf:
      for (std::size_t c = 0; c < d; ++c) {
        std::vector<double> col(k);
        for (std::size_t r = 0; r < k; ++r) col[r] = w(r, c);
        const double target = unit(rng) < 0.5 ? radius : radius * unit(rng);
        rescale(col, vector_norm(col, Exponent{1.0}), target);
        for (std::size_t r = 0; r < k; ++r) w(r, c) = col[r];
      }
      break;
    case LemmaId::kL4TwoOne:
      rescale(w.data(), matrix_norm(w, NormKind::qp(Exponent{2.0}, Exponent{1.0})), radius);
      break;
    case LemmaId::kL5OneOne:
      rescale(w.data(), vector_norm(w.data(), Exponent{1.0}), radius);
      break;
  }
  return w;
}

CoverVerification verify_cover(const Cover& cover, std::span<const Matrix> samples, double eps) {
  if (cover.points.empty()) throw std::invalid_argument("verify_cover: empty cover");
  if (samples.empty()) throw std::invalid_argument("verify_cover: no samples");
  cover.validate();
  CoverVerification out;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const Matrix& w = samples[s];
    if (w.rows() != cover.rows() || w.cols() != cover.cols())
      throw std::invalid_argument("verify_cover: sample shape does not match the cover");
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& p : cover.points) {
      nearest = std::min(nearest, basis_deviation(w, p, cover.basis_scale, cover.eval_norm));
      if (nearest == 0.0) break;
    }
    if (nearest > out.max_deviation || s == 0) {
      out.max_deviation = nearest;
      out.worst_sample = s;
    }
  }
  out.certified = out.max_deviation <= eps;
  return out;
}

// ---------------------------------------------------------------------------
// Brute-force cover sizes
// ---------------------------------------------------------------------------

double EvalMetric::distance(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != b.size()) throw std::invalid_argument("EvalMetric: length mismatch");
  if (block == 0 || a.size() % block != 0)
    throw std::invalid_argument("EvalMetric: length is not a multiple of the block size");
  double worst = 0.0;
  std::vector<double> diff(block);
  for (std::size_t start = 0; start < a.size(); start += block) {
    for (std::size_t j = 0; j < block; ++j) diff[j] = a[start + j] - b[start + j];
    worst = std::max(worst, vector_norm(diff, q));
  }
  return worst;
}

CoverSizeResult brute_force_cover_size(std::span<const std::vector<double>> points, double eps,
                                       CoverSearch mode, EvalMetric metric) {
  const std::size_t n = points.size();
  if (n == 0) throw std::invalid_argument("brute_force_cover_size: no points");
  if (!(eps >= 0.0)) throw std::invalid_argument("brute_force_cover_size: eps must be >= 0");
  if (mode == CoverSearch::kExact && n > kExactCoverCap)
    throw std::invalid_argument("brute_force_cover_size: exact mode is limited to " +
                                std::to_string(kExactCoverCap) + " points");

  std::vector<std::vector<bool>> covers(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      covers[i][j] = metric.distance(points[i], points[j]) <= eps;

  CoverSizeResult out;
  if (mode == CoverSearch::kGreedy) {
    std::vector<bool> covered(n, false);
    std::size_t remaining = n;
    while (remaining > 0) {
      std::size_t best = 0, best_gain = 0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t gain = 0;
        for (std::size_t j = 0; j < n; ++j) gain += (!covered[j] && covers[i][j]) ? 1 : 0;
        if (gain > best_gain) best_gain = gain, best = i;
      }
      out.centers.push_back(best);
      for (std::size_t j = 0; j < n; ++j) {
        if (!covered[j] && covers[best][j]) {
          covered[j] = true;
          --remaining;
        }
      }
    }
    out.size = out.centers.size();
    return out;
  }

  std::vector<std::uint32_t> mask(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (covers[i][j]) mask[i] |= (1u << j);
  const std::uint32_t full = n == 32 ? ~0u : ((1u << n) - 1u);

  std::vector<std::size_t> idx;
  for (std::size_t size = 1; size <= n; ++size) {
    idx.resize(size);
    std::iota(idx.begin(), idx.end(), 0);
    while (true) {
      std::uint32_t acc = 0;
      for (std::size_t i : idx) acc |= mask[i];
      if (acc == full) {
        out.size = size;
        out.exact = true;
        out.centers = idx;
        return out;
      }
      // Next combination in lexicographic order.
      std::size_t pos = size;
      while (pos > 0 && idx[pos - 1] == n - size + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (std::size_t j = pos; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  throw std::logic_error("brute_force_cover_size: unreachable");
}

}  // namespace seqbounds
