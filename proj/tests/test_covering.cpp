#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>
#include <set>

#include "seqbounds/bounds.hpp"
#include "seqbounds/covering.hpp"
#include "seqbounds/seeding.hpp"

using namespace seqbounds;

namespace {

// Minimum error over every composition of k into d parts.
double enumerate_min_error(std::span<const double> alpha, const Matrix& v, std::size_t k) {
  const std::size_t d = alpha.size();
  std::vector<std::size_t> counts(d, 0);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == d) {
      counts[i] = left;
      best = std::min(best, maurey_error_sq(alpha, v, counts));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[i] = c;
      rec(i + 1, left - c);
    }
  };
  rec(0, k);
  return best;
}

// Points z in Z^n with ||z||_1 <= budget, counted by brute force.
std::size_t count_lattice(std::size_t n, int budget) {
  std::size_t count = 0;
  std::vector<int> z(n, -budget);
  while (true) {
    int l1 = 0;
    for (int x : z) l1 += std::abs(x);
    if (l1 <= budget) ++count;
    std::size_t i = 0;
    while (i < n && ++z[i] > budget) z[i++] = -budget;
    if (i == n) break;
  }
  return count;
}

double column_l1_max(const Matrix& w) {
  return matrix_norm(w, NormKind::qp(Exponent(1), Exponent::infinity()));
}

}  // namespace

TEST(LemmaId, ParseAndName) {
  EXPECT_EQ(parse_lemma_id("L3"), LemmaId::kL3OneInf);
  EXPECT_EQ(parse_lemma_id("L4_21"), LemmaId::kL4TwoOne);
  EXPECT_EQ(parse_lemma_id("L5_11"), LemmaId::kL5OneOne);
  EXPECT_EQ(parse_lemma_id(to_string(LemmaId::kL3OneInf)), LemmaId::kL3OneInf);
  EXPECT_THROW(parse_lemma_id("L9"), std::invalid_argument);
}

TEST(Maurey, PointMass) {
  const std::vector<double> alpha{1.0, 0.0};
  const auto r = maurey_sparsify(alpha, Matrix::identity(2), 1.0, 1, 1);
  EXPECT_EQ(r.counts, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.error_sq, 0.0);
}

TEST(Maurey, HalfHalf) {
  const std::vector<double> alpha{0.5, 0.5};
  const auto r = maurey_sparsify(alpha, Matrix::identity(2), 1.0, 2, 1);
  EXPECT_EQ(r.counts, (std::vector<std::size_t>{1, 1}));
  EXPECT_NEAR(r.error_sq, 0.0, 1e-15);
  EXPECT_NEAR(r.bound, 0.25, 1e-15);
}

TEST(Maurey, ThreeQuarters) {
  const std::vector<double> alpha{0.75, 0.25};
  const auto r = maurey_sparsify(alpha, Matrix::identity(2), 1.0, 4, 1);
  EXPECT_NEAR(r.bound, 0.09375, 1e-15);
  EXPECT_LE(r.error_sq, r.bound + 1e-15);
  EXPECT_EQ(enumerate_min_error(alpha, Matrix::identity(2), 4), 0.0);
}

TEST(Maurey, ZeroWeights) {
  const std::vector<double> alpha{0.0, 0.0, 0.0};
  const auto r = maurey_sparsify(alpha, Matrix::identity(3), 1.0, 3, 1);
  EXPECT_EQ(r.error_sq, 0.0);
}

TEST(Maurey, Preconditions) {
  const std::vector<double> too_heavy{0.8, 0.8};
  EXPECT_THROW(maurey_sparsify(too_heavy, Matrix::identity(2), 1.0, 2, 1), std::invalid_argument);
  const std::vector<double> alpha{0.5, 0.5};
  EXPECT_THROW(maurey_sparsify(alpha, Matrix::identity(2) * 2.0, 1.0, 2, 1), std::invalid_argument);
  EXPECT_THROW(maurey_sparsify(alpha, Matrix::identity(2), 1.0, 0, 1), std::invalid_argument);
  const std::vector<double> negative{-0.1, 0.5};
  EXPECT_THROW(maurey_sparsify(negative, Matrix::identity(2), 1.0, 2, 1), std::invalid_argument);
}

// The returned counts always meet the bound, and exhaustive search confirms it is attainable.
TEST(Maurey, BoundHoldsAgainstEnumeration) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> n;
  for (std::size_t d = 1; d <= 3; ++d) {
    for (std::size_t k = 1; k <= 5; ++k) {
      for (int t = 0; t < 20; ++t) {
        std::vector<double> alpha(d);
        double s = 0.0;
        for (auto& a : alpha) s += (a = u(rng));
        const double total = u(rng);
        for (auto& a : alpha) a *= total / s;
        Matrix v(3, d);
        for (double& x : v.data()) x = n(rng);
        for (std::size_t c = 0; c < d; ++c) {
          const double norm = vector_norm(v.column(c), Exponent(2));
          const double target = u(rng);
          for (std::size_t r = 0; r < 3; ++r) v(r, c) *= target / norm;
        }
        const auto res = maurey_sparsify(alpha, v, 1.0, k, derive_seed(7, {d, k, static_cast<std::uint64_t>(t)}));
        std::size_t sum = 0;
        for (auto c : res.counts) sum += c;
        EXPECT_EQ(sum, k);
        EXPECT_LE(res.error_sq, res.bound + 1e-12);
        EXPECT_LE(enumerate_min_error(alpha, v, k), res.bound + 1e-12);
      }
    }
  }
}

TEST(Maurey, Deterministic) {
  const std::vector<double> alpha{0.2, 0.3, 0.4};
  const Matrix v = Matrix::identity(3);
  EXPECT_EQ(maurey_sparsify(alpha, v, 1.0, 5, 99).counts, maurey_sparsify(alpha, v, 1.0, 5, 99).counts);
}

TEST(Sparsity, Rounding) {
  EXPECT_EQ(maurey_sparsity(1.0, 1.0, 0.5), 4u);
  EXPECT_EQ(maurey_sparsity(1.0, 1.0, 1.0), 1u);
  EXPECT_EQ(maurey_sparsity(1.0, 1.0, 2.0), 0u);
  EXPECT_EQ(maurey_sparsity(1.0, 1.0, 0.3), 12u);
}

TEST(Lattice, CountMatchesBruteForce) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (int k = 0; k <= 4; ++k)
      EXPECT_EQ(l1_lattice_count(n, static_cast<std::size_t>(k)), static_cast<double>(count_lattice(n, k)))
          << "n=" << n << " K=" << k;
}

TEST(BuildCover, LemmaThreeExample) {
  const Cover c = build_cover(LemmaId::kL3OneInf, 2, 2, 1.0, 1.0, 0.5);
  EXPECT_EQ(c.points.size(), 1681u);
  EXPECT_EQ(c.rows(), 2u);
  EXPECT_EQ(c.cols(), 2u);
  EXPECT_LE(c.log_size(), 8.0 * std::log(5.0));
  for (const auto& p : c.points) EXPECT_LE(column_l1_max(p), 1.0 + 1e-12);
}

TEST(BuildCover, LemmaFiveExample) {
  const Cover c = build_cover(LemmaId::kL5OneOne, 1, 1, 1.0, 1.0, 1.0);
  EXPECT_EQ(c.points.size(), 3u);
  EXPECT_LE(c.log_size(), std::log(3.0) + 1e-15);
}

TEST(BuildCover, LemmaFourIsNonConstructive) {
  EXPECT_THROW(build_cover(LemmaId::kL4TwoOne, 2, 2, 1.0, 1.0, 0.5), NonConstructiveError);
}

TEST(BuildCover, SizeGuard) {
  EXPECT_THROW(build_cover(LemmaId::kL3OneInf, 8, 8, 1.0, 1.0, 0.2), std::length_error);
}

TEST(BuildCover, LogSizeWithinBound) {
  struct Case {
    LemmaId lemma;
    std::size_t d, k;
    double eps;
  };
  // B_w B_x / eps chosen so the squared ratio is an integer.
  const Case cases[] = {{LemmaId::kL3OneInf, 1, 1, 1.0},    {LemmaId::kL3OneInf, 2, 3, 1.0},
                        {LemmaId::kL3OneInf, 3, 2, 0.5},    {LemmaId::kL3OneInf, 1, 4, 1.0 / 3.0},
                        {LemmaId::kL5OneOne, 2, 2, 0.5},    {LemmaId::kL5OneOne, 3, 2, 0.5},
                        {LemmaId::kL5OneOne, 2, 3, 1.0 / 3.0}, {LemmaId::kL5OneOne, 1, 1, 0.25}};
  for (const auto& c : cases) {
    const Cover cover = build_cover(c.lemma, c.d, c.k, 1.0, 1.0, c.eps);
    const double bound = covering_constant(c.lemma, c.d, c.k, 1.0, 1.0).value / (c.eps * c.eps);
    EXPECT_LE(cover.log_size(), bound + 1e-12) << to_string(c.lemma) << " d=" << c.d << " k=" << c.k;
    for (const auto& p : cover.points) {
      if (c.lemma == LemmaId::kL3OneInf) EXPECT_LE(column_l1_max(p), 1.0 + 1e-12);
      else EXPECT_LE(vector_norm(p.data(), Exponent(1)), 1.0 + 1e-12);
    }
  }
}

TEST(BuildCover, CertifiesRandomBudgetMatrices) {
  for (auto lemma : {LemmaId::kL3OneInf, LemmaId::kL5OneOne}) {
    const Cover c = build_cover(lemma, 2, 2, 1.0, 1.0, 0.5);
    std::vector<Matrix> samples;
    for (std::uint64_t i = 0; i < 200; ++i) samples.push_back(random_budget_matrix(lemma, 2, 2, 1.0, i));
    const auto v = verify_cover(c, samples, 0.5);
    EXPECT_TRUE(v.certified) << to_string(lemma) << " deviation " << v.max_deviation;
  }
}

TEST(RandomBudgetMatrix, SatisfiesBudget) {
  for (std::uint64_t s = 0; s < 100; ++s) {
    EXPECT_LE(column_l1_max(random_budget_matrix(LemmaId::kL3OneInf, 3, 4, 2.0, s)), 2.0 + 1e-12);
    EXPECT_LE(matrix_norm(random_budget_matrix(LemmaId::kL4TwoOne, 3, 4, 2.0, s),
                          NormKind::qp(Exponent(2), Exponent(1))),
              2.0 + 1e-12);
    EXPECT_LE(vector_norm(random_budget_matrix(LemmaId::kL5OneOne, 3, 4, 2.0, s).data(), Exponent(1)),
              2.0 + 1e-12);
  }
}

TEST(VerifyCover, Basics) {
  Cover c;
  c.epsilon = 0.1;
  c.points.push_back(Matrix::from_rows({{0.5, 0.0}}));
  c.points.push_back(Matrix::from_rows({{0.0, -0.25}}));
  const std::vector<Matrix> exact{Matrix::from_rows({{0.0, -0.25}})};
  EXPECT_EQ(verify_cover(c, exact, 0.1).max_deviation, 0.0);

  const std::vector<Matrix> wrong_shape{Matrix(2, 2)};
  EXPECT_THROW(verify_cover(c, wrong_shape, 0.1), std::invalid_argument);
  Cover empty;
  empty.epsilon = 0.1;
  EXPECT_THROW(verify_cover(empty, exact, 0.1), std::invalid_argument);
}

TEST(LiftScalarCover, SizesAndResolution) {
  ScalarCover s;
  s.epsilon = 0.1;
  s.vectors = {{0.0, 1.0}, {1.0, 0.0}, {0.5, 0.5}};
  const Cover a = lift_scalar_cover(s, 2, Exponent(2));
  EXPECT_EQ(a.points.size(), 9u);
  EXPECT_NEAR(a.epsilon, std::sqrt(2.0) * 0.1, 1e-15);
  EXPECT_EQ(a.rows(), 2u);

  const Cover b = lift_scalar_cover(s, 1, Exponent(2));
  EXPECT_EQ(b.points.size(), 3u);
  EXPECT_DOUBLE_EQ(b.epsilon, 0.1);

  s.vectors.pop_back();
  const Cover c = lift_scalar_cover(s, 4, Exponent(2));
  EXPECT_EQ(c.points.size(), 16u);
  EXPECT_NEAR(c.epsilon, 0.2, 1e-15);

  ScalarCover empty;
  EXPECT_THROW(lift_scalar_cover(empty, 2, Exponent(2)), std::invalid_argument);
}

// Every row of a lifted point comes from the scalar cover, and every stacking appears.
TEST(LiftScalarCover, AllStackings) {
  ScalarCover s;
  s.epsilon = 0.5;
  s.vectors = {{1.0}, {2.0}, {3.0}};
  const Cover c = lift_scalar_cover(s, 3, Exponent::infinity());
  EXPECT_DOUBLE_EQ(c.epsilon, 0.5);
  std::set<std::vector<double>> seen;
  for (const auto& p : c.points) seen.insert(std::vector<double>(p.data().begin(), p.data().end()));
  EXPECT_EQ(seen.size(), 27u);
}

TEST(BruteForceCover, Examples) {
  const std::vector<std::vector<double>> one{{0.3, 0.1}};
  EXPECT_EQ(brute_force_cover_size(one, 0.1, CoverSearch::kExact).size, 1u);
  const std::vector<std::vector<double>> two{{0.0}, {3.0}};
  EXPECT_EQ(brute_force_cover_size(two, 1.0, CoverSearch::kExact).size, 2u);
  const std::vector<std::vector<double>> line{{0.0}, {1.0}, {2.0}, {3.0}, {4.0}};
  const auto r = brute_force_cover_size(line, 1.0, CoverSearch::kExact);
  EXPECT_EQ(r.size, 2u);
  EXPECT_TRUE(r.exact);
}

TEST(BruteForceCover, ExactAtMostGreedy) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  for (int t = 0; t < 30; ++t) {
    std::vector<std::vector<double>> pts(12, std::vector<double>(2));
    for (auto& p : pts)
      for (auto& x : p) x = u(rng);
    const auto exact = brute_force_cover_size(pts, 0.8, CoverSearch::kExact);
    const auto greedy = brute_force_cover_size(pts, 0.8, CoverSearch::kGreedy);
    EXPECT_LE(exact.size, greedy.size);
    EXPECT_FALSE(greedy.exact);
  }
}

TEST(BruteForceCover, ExactCap) {
  std::vector<std::vector<double>> pts(kExactCoverCap + 1, std::vector<double>{0.0});
  EXPECT_THROW(brute_force_cover_size(pts, 1.0, CoverSearch::kExact), std::invalid_argument);
  EXPECT_NO_THROW(brute_force_cover_size(pts, 1.0, CoverSearch::kGreedy));
}

// For any l1-bounded input set, the deviation on the set never exceeds the deviation on the scaled basis.
TEST(Lemma2, BasisDeviationBoundsInputDeviation) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double b_x = 1.5;
  for (int t = 0; t < 50; ++t) {
    Matrix w(3, 4), w_hat(3, 4);
    for (double& x : w.data()) x = n(rng);
    for (double& x : w_hat.data()) x = n(rng);
    std::vector<std::vector<double>> inputs(10, std::vector<double>(4));
    for (auto& x : inputs) {
      for (double& e : x) e = n(rng);
      const double s = b_x * u(rng) / vector_norm(x, Exponent(1));
      for (double& e : x) e *= s;
    }
    for (Exponent q : {Exponent(1), Exponent(2), Exponent::infinity()})
      EXPECT_LE(input_deviation(w, w_hat, inputs, q), basis_deviation(w, w_hat, b_x, q) + 1e-12);
  }
}
