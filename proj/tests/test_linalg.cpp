#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "seqbounds/linalg.hpp"

using namespace seqbounds;

namespace {

Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(r, c);
  for (double& x : m.data()) x = n(rng);
  return m;
}

const Exponent kInf = Exponent::infinity();

}  // namespace

TEST(Matrix, RejectsNonFiniteAndBadLength) {
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), std::invalid_argument);
  EXPECT_THROW(Matrix(1, 2, std::vector<double>{1, std::nan("")}), std::invalid_argument);
  EXPECT_THROW(Matrix(1, 1, std::vector<double>{std::numeric_limits<double>::infinity()}),
               std::invalid_argument);
}

TEST(Matrix, ProductsAgree) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(rng, 3, 4), b = random_matrix(rng, 4, 2), c = random_matrix(rng, 3, 2);
  const Matrix ab = matmul(a, b);
  const Matrix tn = matmul_tn(a.transpose(), b);
  const Matrix nt = matmul_nt(a, b.transpose());
  for (std::size_t i = 0; i < ab.size(); ++i) {
    EXPECT_NEAR(ab.data()[i], tn.data()[i], 1e-14);
    EXPECT_NEAR(ab.data()[i], nt.data()[i], 1e-14);
  }
  const std::vector<double> x{1.0, -2.0};
  const auto y = matvec(c, x);
  const auto yt = matvec_t(c.transpose(), x);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(y[i], c(i, 0) - 2.0 * c(i, 1));
    EXPECT_DOUBLE_EQ(yt[i], y[i]);
  }
  EXPECT_THROW(matmul(a, c), std::invalid_argument);
}

TEST(Exponent, Validation) {
  EXPECT_THROW(Exponent(0.5), std::invalid_argument);
  EXPECT_THROW(Exponent(std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_TRUE(kInf.is_infinite());
  EXPECT_FALSE(Exponent(1.0).is_infinite());
}

TEST(MatrixNorm, HandTable) {
  const Matrix w = Matrix::from_rows({{1, -2}, {3, 4}});
  EXPECT_NEAR(matrix_norm(w, NormKind::qp(Exponent(1), kInf)), 6.0, 1e-12);
  EXPECT_NEAR(matrix_norm(w, NormKind::qp(Exponent(2), Exponent(1))), std::sqrt(10.0) + std::sqrt(20.0), 1e-12);
  EXPECT_NEAR(matrix_norm(w, NormKind::frobenius()), std::sqrt(30.0), 1e-12);
  EXPECT_NEAR(matrix_norm(w, NormKind::qp(Exponent(1), Exponent(1))), 10.0, 1e-12);
  EXPECT_NEAR(matrix_norm(w, NormKind::qp(kInf, kInf)), 4.0, 1e-12);
  // Largest singular value of [[1,-2],[3,4]]: sqrt((30 + sqrt(500)) / 2).
  EXPECT_NEAR(matrix_norm(w, NormKind::operator2()), std::sqrt((30.0 + std::sqrt(500.0)) / 2.0), 1e-9);
}

TEST(MatrixNorm, ZeroAndIdentity) {
  const Matrix z(3, 3);
  for (auto kind : {NormKind::qp(Exponent(1), kInf), NormKind::qp(Exponent(2), Exponent(1)), NormKind::frobenius(),
                    NormKind::operator2()})
    EXPECT_EQ(matrix_norm(z, kind), 0.0);
  EXPECT_NEAR(matrix_norm(Matrix::identity(3), NormKind::frobenius()), std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(matrix_norm(Matrix::identity(3), NormKind::operator2()), 1.0, 1e-9);
  EXPECT_THROW(matrix_norm(Matrix(), NormKind::frobenius()), std::invalid_argument);
}

TEST(MatrixNorm, FrobeniusIsQp22) {
  std::mt19937_64 rng(11);
  const Matrix w = random_matrix(rng, 5, 7);
  EXPECT_NEAR(matrix_norm(w, NormKind::frobenius()), matrix_norm(w, NormKind::qp(Exponent(2), Exponent(2))), 1e-12);
}

TEST(MatrixNorm, OperatorBelowFrobenius) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> dim(1, 16);
  for (int t = 0; t < 100; ++t) {
    const Matrix w = random_matrix(rng, dim(rng), dim(rng));
    EXPECT_LE(matrix_norm(w, NormKind::operator2()), matrix_norm(w, NormKind::frobenius()) + 1e-9);
  }
}

TEST(MatrixNorm, OperatorMatchesDiagonal) {
  Matrix w(3, 3);
  w(0, 0) = 0.5;
  w(1, 1) = -7.0;
  w(2, 2) = 3.0;
  EXPECT_NEAR(matrix_norm(w, NormKind::operator2()), 7.0, 1e-9);
}

TEST(MatrixNorm, OneVersusInfinityOuter) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  for (int t = 0; t < 200; ++t) {
    const std::size_t d = dim(rng);
    const Matrix w = random_matrix(rng, dim(rng), d);
    for (double p : {1.0, 2.0}) {
      const double n1 = matrix_norm(w, NormKind::qp(Exponent(p), Exponent(1)));
      const double ninf = matrix_norm(w, NormKind::qp(Exponent(p), kInf));
      EXPECT_LE(n1, static_cast<double>(d) * ninf + 1e-12);
    }
  }
}

TEST(VectorNorm, NoOverflow) {
  const std::vector<double> v{1e200, 1e200};
  EXPECT_NEAR(vector_norm(v, Exponent(2)) / 1e200, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(vector_norm(v, Exponent(3)) / 1e200, std::cbrt(2.0), 1e-12);
}

TEST(Softmax, Examples) {
  const Matrix a = row_softmax(Matrix::from_rows({{0, 0}}));
  EXPECT_DOUBLE_EQ(a(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(a(0, 1), 0.5);
  const Matrix b = row_softmax(Matrix::from_rows({{std::log(2.0), 0}}));
  EXPECT_NEAR(b(0, 0), 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(b(0, 1), 1.0 / 3.0, 1e-15);
  const Matrix c = row_softmax(Matrix::from_rows({{1000, 0}}));
  EXPECT_EQ(c(0, 0), 1.0);
  EXPECT_NEAR(c(0, 1), std::exp(-1000.0), 1e-300);
  EXPECT_TRUE(c.all_finite());
}

TEST(Softmax, RowsSumToOne) {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = random_matrix(rng, 4, 9, 10.0);
    const Matrix s = row_softmax(m);
    for (std::size_t r = 0; r < s.rows(); ++r) {
      double sum = 0.0;
      for (double x : s.row(r)) {
        EXPECT_GT(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Softmax, LipschitzInLinf) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> dim(1, 64);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t k = dim(rng);
    std::vector<double> a(k), b(k);
    for (auto& x : a) x = n(rng);
    for (std::size_t i = 0; i < k; ++i) b[i] = a[i] + 0.1 * n(rng);
    const auto sa = softmax(a), sb = softmax(b);
    double l1 = 0.0, linf = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      l1 += std::abs(sa[i] - sb[i]);
      linf = std::max(linf, std::abs(a[i] - b[i]));
    }
    EXPECT_LE(l1, 2.0 * linf + 1e-15);
  }
}

TEST(Project, RowsUnitL2) {
  const Matrix p = project(Matrix::from_rows({{3, 4}, {0.3, 0.4}}), Projection::rows_unit_l2());
  EXPECT_NEAR(p(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.8, 1e-15);
  EXPECT_EQ(p(1, 0), 0.3);
  EXPECT_EQ(p(1, 1), 0.4);
}

TEST(Project, L1BallExample) {
  const Matrix p = project(Matrix::from_rows({{0.8, 0.8}}), Projection::l1_ball(1.0));
  EXPECT_NEAR(p(0, 0), 0.5, 1e-15);
  EXPECT_NEAR(p(0, 1), 0.5, 1e-15);
  EXPECT_THROW(project(Matrix(1, 1), Projection::l1_ball(0.0)), std::invalid_argument);
}

// Exhaustive grid minimization of Euclidean distance over the l1 ball.
TEST(Project, L1BallMatchesGridOracle) {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> v{u(rng), u(rng)};
    const auto p = project_l1_ball(v, 1.0);
    double best = std::numeric_limits<double>::infinity();
    for (int i = -1000; i <= 1000; ++i) {
      for (int j = -1000; j <= 1000; ++j) {
        const double x = i * 1e-3, y = j * 1e-3;
        if (std::abs(x) + std::abs(y) > 1.0 + 1e-12) continue;
        best = std::min(best, std::hypot(x - v[0], y - v[1]));
      }
    }
    EXPECT_LE(std::hypot(p[0] - v[0], p[1] - v[1]), best + 1e-12);
    EXPECT_LE(std::abs(p[0]) + std::abs(p[1]), 1.0 + 1e-12);
  }
}

TEST(Project, Idempotent) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 50; ++t) {
    const Matrix m = random_matrix(rng, 4, 5, 2.0);
    for (auto mode : {Projection::rows_unit_l2(), Projection::l1_ball(1.5)}) {
      const Matrix once = project(m, mode);
      const Matrix twice = project(once, mode);
      for (std::size_t i = 0; i < once.data().size(); ++i) EXPECT_NEAR(once.data()[i], twice.data()[i], 1e-12);
    }
    const Matrix r = project(m, Projection::rows_unit_l2());
    for (std::size_t i = 0; i < r.rows(); ++i) EXPECT_LE(vector_norm(r.row(i), Exponent(2)), 1.0 + 1e-12);
  }
}

TEST(Project, StructuredBalls) {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 30; ++t) {
    Matrix a = random_matrix(rng, 4, 3, 2.0), b = a, c = a;
    project_columns_l1_inplace(a, 1.0);
    for (std::size_t j = 0; j < a.cols(); ++j) EXPECT_LE(vector_norm(a.column(j), Exponent(1)), 1.0 + 1e-12);
    project_rows_l1_inplace(b, 1.0);
    for (std::size_t i = 0; i < b.rows(); ++i) EXPECT_LE(vector_norm(b.row(i), Exponent(1)), 1.0 + 1e-12);
    project_group_l21_inplace(c, 1.0);
    EXPECT_LE(matrix_norm(c, NormKind::qp(Exponent(2), Exponent(1))), 1.0 + 1e-12);
  }
}

// Group projection optimality: the projected point is closer than random feasible points.
TEST(Project, GroupL21BeatsFeasibleSamples) {
  std::mt19937_64 rng(31);
  const Matrix m = random_matrix(rng, 3, 4, 2.0);
  Matrix p = m;
  project_group_l21_inplace(p, 1.0);
  const double dist = matrix_norm(p - m, NormKind::frobenius());
  for (int t = 0; t < 2000; ++t) {
    Matrix q = random_matrix(rng, 3, 4, 1.0);
    project_group_l21_inplace(q, 1.0);
    EXPECT_LE(dist, matrix_norm(q - m, NormKind::frobenius()) + 1e-12);
  }
}
