#include "seqbounds/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

namespace seqbounds {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {
  if (!std::isfinite(fill)) throw std::invalid_argument("Matrix: non-finite fill value");
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  if (!all_finite()) throw std::invalid_argument("Matrix: non-finite entry");
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Matrix(r, c, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double x) { return std::isfinite(x); });
}

static void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

Matrix& Matrix::operator+=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  require_same_shape(*this, other, "Matrix::operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& x : data_) x *= s;
  return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(Matrix a, double s) { return a *= s; }

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t p = 0; p < a.cols(); ++p) {
      const double aip = a(i, p);
      if (aip == 0.0) continue;
      auto b_row = b.row(p);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aip * b_row[j];
    }
  }
  return out;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: inner dimension mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t p = 0; p < a.rows(); ++p) {
    auto a_row = a.row(p);
    auto b_row = b.row(p);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double api = a_row[i];
      if (api == 0.0) continue;
      auto out_row = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += api * b_row[j];
    }
  }
  return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) out(i, j) = dot(a.row(i), b.row(j));
  return out;
}

std::vector<double> matvec(const Matrix& m, std::span<const double> x) {
  if (m.cols() != x.size()) throw std::invalid_argument("matvec: dimension mismatch");
  std::vector<double> out(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i) out[i] = dot(m.row(i), x);
  return out;
}

std::vector<double> matvec_t(const Matrix& m, std::span<const double> x) {
  if (m.rows() != x.size()) throw std::invalid_argument("matvec_t: dimension mismatch");
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double xi = x[i];
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] += xi * r[j];
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Exponent::Exponent(double p) : p_(p), infinite_(false) {
  if (!std::isfinite(p) || p < 1.0)
    throw std::invalid_argument("Exponent: need finite p >= 1 (use Exponent::infinity())");
}

double vector_norm(std::span<const double> v, Exponent p) {
  if (p.is_infinite()) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  const double e = p.value();
  if (e == 1.0) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
  }
  if (e == 2.0) {
    // Scaled accumulation avoids overflow for large entries.
    double scale = 0.0;
    for (double x : v) scale = std::max(scale, std::abs(x));
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) {
      const double y = x / scale;
      s += y * y;
    }
    return scale * std::sqrt(s);
  }
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x) / scale, e);
  return scale * std::pow(s, 1.0 / e);
}

namespace {

double operator2_norm(const Matrix& w) {
  const std::size_t n = w.cols();
  std::mt19937_64 rng(0x5eedb0u);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::vector<double> x(n);
  for (double& xi : x) xi = unif(rng);

  auto normalize = [](std::vector<double>& v) {
    const double nv = vector_norm(v, Exponent{2.0});
    if (nv == 0.0) return 0.0;
    for (double& vi : v) vi /= nv;
    return nv;
  };
  if (normalize(x) == 0.0) return 0.0;

  double sigma = 0.0;
  for (int it = 0; it < 10000; ++it) {
    std::vector<double> y = matvec(w, x);  // W x
    const double next = vector_norm(y, Exponent{2.0});
    if (next == 0.0) {
      // Start vector in the null space; restart along the heaviest column.
      if (it > 0) return sigma;
      std::size_t best = 0;
      double best_norm = -1.0;
      for (std::size_t c = 0; c < n; ++c) {
        const double cn = vector_norm(w.column(c), Exponent{2.0});
        if (cn > best_norm) best_norm = cn, best = c;
      }
      if (best_norm == 0.0) return 0.0;
      std::fill(x.begin(), x.end(), 0.0);
      x[best] = 1.0;
      continue;
    }
    x = matvec_t(w, y);  // W^T W x
    normalize(x);
    const bool converged = std::abs(next - sigma) <= 1e-10 * next;
    sigma = next;
    if (converged) break;
  }
  return sigma;
}

}  // namespace

double matrix_norm(const Matrix& w, NormKind kind) {
  if (w.empty()) throw std::invalid_argument("matrix_norm: empty matrix");
  switch (kind.tag) {
    case NormKind::Tag::kFrobenius:
      return vector_norm(w.data(), Exponent{2.0});
    case NormKind::Tag::kOperator2:
      return operator2_norm(w);
    case NormKind::Tag::kQP: {
      std::vector<double> col_norms(w.cols());
      for (std::size_t c = 0; c < w.cols(); ++c) col_norms[c] = vector_norm(w.column(c), kind.q);
      return vector_norm(col_norms, kind.p);
    }
  }
  throw std::invalid_argument("matrix_norm: unknown norm kind");
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  if (logits.empty()) return out;
  const double mx = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - mx);
    total += out[i];
  }
  for (double& o : out) o /= total;
  return out;
}

Matrix row_softmax(const Matrix& m) {
  if (m.empty()) throw std::invalid_argument("row_softmax: empty matrix");
  Matrix out(m.rows(), m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto s = softmax(m.row(r));
    std::copy(s.begin(), s.end(), out.row(r).begin());
  }
  return out;
}

void project_l1_ball_inplace(std::span<double> v, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_l1_ball: radius must be positive");
  double l1 = 0.0;
  for (double x : v) l1 += std::abs(x);
  // Slack keeps the projection idempotent under rounding.
  if (l1 <= radius * (1.0 + 1e-14)) return;

  // Threshold theta solves sum_i max(|v_i| - theta, 0) = radius.
  std::vector<double> mags(v.size());
  std::transform(v.begin(), v.end(), mags.begin(), [](double x) { return std::abs(x); });
  std::sort(mags.begin(), mags.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < mags.size(); ++j) {
    cumulative += mags[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    if (mags[j] - candidate > 0.0) theta = candidate;
  }
  for (double& x : v) {
    const double shrunk = std::max(std::abs(x) - theta, 0.0);
    x = std::copysign(shrunk, x);
  }
}

std::vector<double> project_l1_ball(std::span<const double> v, double radius) {
  std::vector<double> out(v.begin(), v.end());
  project_l1_ball_inplace(out, radius);
  return out;
}

void project_rows_l1_inplace(Matrix& m, double radius) {
  for (std::size_t r = 0; r < m.rows(); ++r) project_l1_ball_inplace(m.row(r), radius);
}

void project_columns_l1_inplace(Matrix& m, double radius) {
  for (std::size_t c = 0; c < m.cols(); ++c) {
    auto col = m.column(c);
    project_l1_ball_inplace(col, radius);
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) = col[r];
  }
}

void project_group_l21_inplace(Matrix& m, double radius) {
  if (!(radius > 0.0)) throw std::invalid_argument("project_group_l21: radius must be positive");
  std::vector<double> norms(m.cols());
  for (std::size_t c = 0; c < m.cols(); ++c) norms[c] = vector_norm(m.column(c), Exponent{2.0});
  // Projecting the vector of column norms onto the l1 ball gives the shrunk
  // norms; each column keeps its direction (block soft-thresholding).
  auto shrunk = project_l1_ball(norms, radius);
  for (std::size_t c = 0; c < m.cols(); ++c) {
    if (norms[c] == shrunk[c]) continue;
    const double scale = norms[c] > 0.0 ? shrunk[c] / norms[c] : 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) m(r, c) *= scale;
  }
}

Matrix project(const Matrix& m, Projection mode) {
  Matrix out = m;
  switch (mode.mode) {
    case Projection::Mode::kRowsUnitL2:
      for (std::size_t r = 0; r < out.rows(); ++r) {
        auto row = out.row(r);
        const double n = vector_norm(row, Exponent{2.0});
        if (n > 1.0)
          for (double& x : row) x /= n;
      }
      return out;
    case Projection::Mode::kL1Ball:
      project_l1_ball_inplace(out.data(), mode.radius);
      return out;
  }
  throw std::invalid_argument("project: unknown mode");
}

}  // namespace seqbounds
