#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace seqbounds {

/// Dense row-major matrix of doubles. Every entry is finite.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Takes ownership of `data` (row-major). Throws std::invalid_argument on a
  /// length mismatch or a non-finite entry.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }
  std::vector<double> column(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Matrix transpose() const;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(Matrix a, double s);

/// a * b
Matrix matmul(const Matrix& a, const Matrix& b);
/// a^T * b
Matrix matmul_tn(const Matrix& a, const Matrix& b);
/// a * b^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
/// m * x
std::vector<double> matvec(const Matrix& m, std::span<const double> x);
/// m^T * x
std::vector<double> matvec_t(const Matrix& m, std::span<const double> x);

double dot(std::span<const double> a, std::span<const double> b);

/// Norm exponent in [1, inf]. Infinity is a distinct state, never a float sentinel.
class Exponent {
 public:
  /// Throws std::invalid_argument unless p is finite and p >= 1.
  explicit Exponent(double p);
  static Exponent infinity() noexcept { return Exponent(); }

  bool is_infinite() const noexcept { return infinite_; }
  /// Finite value; meaningless when is_infinite().
  double value() const noexcept { return p_; }

  friend bool operator==(const Exponent&, const Exponent&) = default;

 private:
  Exponent() noexcept : p_(0.0), infinite_(true) {}
  double p_;
  bool infinite_;
};

struct NormKind {
  enum class Tag { kQP, kOperator2, kFrobenius };

  Tag tag = Tag::kFrobenius;
  Exponent q{2.0};  // inner (per-column) exponent, kQP only
  Exponent p{2.0};  // outer exponent, kQP only

  static NormKind qp(Exponent q, Exponent p) { return {Tag::kQP, q, p}; }
  static NormKind operator2() { return {Tag::kOperator2, Exponent{2.0}, Exponent{2.0}}; }
  static NormKind frobenius() { return {Tag::kFrobenius, Exponent{2.0}, Exponent{2.0}}; }
};

double vector_norm(std::span<const double> v, Exponent p);

/// ||W||_{q,p} is the p-norm of the vector of column q-norms. operator2 is the
/// largest singular value, found by power iteration on W^T W from a fixed
/// seeded start (relative tolerance 1e-10, at most 10 000 iterations).
/// Throws std::invalid_argument for an empty matrix.
double matrix_norm(const Matrix& w, NormKind kind);

std::vector<double> softmax(std::span<const double> logits);
/// Softmax of every row, with per-row max subtraction.
Matrix row_softmax(const Matrix& m);

struct Projection {
  enum class Mode { kRowsUnitL2, kL1Ball };
  Mode mode = Mode::kRowsUnitL2;
  double radius = 1.0;  // kL1Ball only

  static Projection rows_unit_l2() { return {Mode::kRowsUnitL2, 1.0}; }
  static Projection l1_ball(double r) { return {Mode::kL1Ball, r}; }
};

/// kRowsUnitL2 rescales every row whose l2 norm exceeds 1 onto the unit sphere.
/// kL1Ball is the Euclidean projection of the flattened matrix onto the l1 ball.
Matrix project(const Matrix& m, Projection mode);

/// Euclidean projection of v onto {x : ||x||_1 <= radius} (sort and threshold).
std::vector<double> project_l1_ball(std::span<const double> v, double radius);
void project_l1_ball_inplace(std::span<double> v, double radius);

// Column- and row-wise variants used for structured budgets.
void project_columns_l1_inplace(Matrix& m, double radius);
void project_rows_l1_inplace(Matrix& m, double radius);
/// Euclidean projection onto {W : sum_j ||W_{:,j}||_2 <= radius}.
void project_group_l21_inplace(Matrix& m, double radius);

}  // namespace seqbounds
