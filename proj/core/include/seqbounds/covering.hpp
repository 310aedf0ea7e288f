#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seqbounds/linalg.hpp"

namespace seqbounds {

/// Which linear covering bound a cover or constant refers to.
///   kL3OneInf: ||x||_1 <= B_x inputs, ||W||_{1,inf} <= B_w matrices.
///   kL4TwoOne: ||x||_1 <= B_x inputs, ||W||_{2,1} <= B_w matrices (size bound only).
///   kL5OneOne: ||x||_2 <= B_x inputs, ||W||_{1,1} <= B_w matrices.
enum class LemmaId { kL3OneInf, kL4TwoOne, kL5OneOne };

std::string to_string(LemmaId id);
/// Accepts "L3", "L4", "L5" and the long forms "L3_1inf", "L4_21", "L5_11".
LemmaId parse_lemma_id(const std::string& s);

/// The matrix-norm budget a lemma imposes on W (k x d).
NormKind lemma_matrix_norm(LemmaId id);

/// Raised when a cover exists only through an external, non-constructive argument.
class NonConstructiveError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A finite set of k x d matrices that eps-covers a linear class on the scaled
/// basis inputs {B_x e_1, ..., B_x e_d}.
struct Cover {
  std::vector<Matrix> points;
  double epsilon = 0.0;
  Exponent eval_norm{2.0};
  double basis_scale = 1.0;

  std::size_t rows() const { return points.empty() ? 0 : points.front().rows(); }
  std::size_t cols() const { return points.empty() ? 0 : points.front().cols(); }
  double log_size() const;
  /// Throws std::invalid_argument if points disagree in shape or epsilon <= 0.
  void validate() const;
};

struct MaureyResult {
  std::vector<std::size_t> counts;  // k_i, sum == k
  double error_sq = 0.0;            // ||f - (gamma/k) sum_i k_i V_i||_2^2
  double bound = 0.0;               // (gamma^2 b^2 - ||f||^2) / k
  bool enumerated = false;          // true when the exhaustive fallback was used
};

/// Sparse integer approximation of f = sum_i alpha_i V_i (V_i = columns of `v`).
/// The approximant is (gamma / k) sum_i k_i V_i with gamma = ||alpha||_1 and
/// sum_i k_i = k; this is the usual average when gamma = 1.
///
/// Draws k i.i.d. indices proportional to alpha, up to 100 attempts, then falls
/// back to exhaustive search over all compositions when d * k <= 12.
/// Throws std::invalid_argument if alpha has a negative entry, sums above 1,
/// a column of `v` exceeds norm b, or k == 0; std::runtime_error if no
/// certified approximation was found.
MaureyResult maurey_sparsify(std::span<const double> alpha, const Matrix& v, double b,
                             std::size_t k, std::uint64_t seed);

/// Error of a given count vector, with the same approximant as maurey_sparsify.
double maurey_error_sq(std::span<const double> alpha, const Matrix& v,
                       std::span<const std::size_t> counts);

/// Maximum number of points a materialized cover may hold.
inline constexpr double kMaxCoverPoints = 1e7;

/// Maurey sparsity level needed for resolution eps: ceil(B_w^2 B_x^2 / eps^2),
/// or 0 when the zero matrix alone covers (eps >= B_w B_x).
std::size_t maurey_sparsity(double b_w, double b_x, double epsilon);

/// Number of integer vectors z in Z^n with ||z||_1 <= budget.
double l1_lattice_count(std::size_t n, std::size_t budget);

/// Explicit cover for L3 (product of per-column Maurey covers of the l1 ball)
/// or L5 (Maurey cover of the flattened l1 ball). Throws NonConstructiveError
/// for L4 and std::length_error when the cover would exceed kMaxCoverPoints.
Cover build_cover(LemmaId lemma, std::size_t d, std::size_t k, double b_w, double b_x,
                  double epsilon);

/// Cover of scalar-valued maps x -> w.x, given as the vectors w.
struct ScalarCover {
  std::vector<std::vector<double>> vectors;
  double epsilon = 0.0;
  double basis_scale = 1.0;
};

/// All k-row stackings of the scalar cover vectors. The result covers x -> Wx
/// at resolution k^{1/q} eps in the q-norm.
Cover lift_scalar_cover(const ScalarCover& scalar, std::size_t k, Exponent q);

/// max_i ||(W - What) B_x e_i||_q
double basis_deviation(const Matrix& w, const Matrix& w_hat, double b_x, Exponent q);
/// max_j ||(W - What) x_j||_q over the given input vectors.
double input_deviation(const Matrix& w, const Matrix& w_hat,
                       std::span<const std::vector<double>> inputs, Exponent q);

struct CoverVerification {
  double max_deviation = 0.0;
  std::size_t worst_sample = 0;
  bool certified = false;  // max_deviation <= eps
};

/// Random k x d matrix inside the lemma's B_w ball; about half the draws lie on
/// the boundary.
Matrix random_budget_matrix(LemmaId lemma, std::size_t d, std::size_t k, double b_w,
                            std::uint64_t seed);

/// For every sample, the closest cover point in basis deviation; reports the
/// worst sample. Throws std::invalid_argument for an empty cover, no samples,
/// or a shape mismatch.
CoverVerification verify_cover(const Cover& cover, std::span<const Matrix> samples, double eps);

enum class CoverSearch { kExact, kGreedy };

/// Distance between two evaluation vectors: the largest q-norm over
/// consecutive blocks of `block` coordinates (one block per input).
struct EvalMetric {
  std::size_t block = 1;
  Exponent q{2.0};
  double distance(std::span<const double> a, std::span<const double> b) const;
};

inline constexpr std::size_t kExactCoverCap = 20;

struct CoverSizeResult {
  std::size_t size = 0;
  bool exact = false;
  std::vector<std::size_t> centers;
};

/// Smallest subset of `points` whose closed eps-balls contain every point.
/// kExact is exhaustive (at most kExactCoverCap points, else
/// std::invalid_argument); kGreedy returns an upper bound.
CoverSizeResult brute_force_cover_size(std::span<const std::vector<double>> points, double eps,
                                       CoverSearch mode, EvalMetric metric = {});

}  // namespace seqbounds
