#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace kpod {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;

/// Reduced matrices whose estimated condition number exceeds this are rejected.
inline constexpr double kMaxReducedCondition = 1e14;

/// Descending nonnegative spectrum with the rank retained under tolerance
/// `tolerance`: the smallest k whose partial sum reaches (1 - tolerance) of
/// the total.
struct Spectrum {
  std::vector<double> values;
  int rank = 0;
  double tolerance = 0.0;

  double total() const;
  /// Share of the total carried by the first `k` values.
  double cumulative_fraction(int k) const;
};

/// Applies the accumulated-spectrum criterion. Throws `Errc::numerical`
/// ("degenerate matrix") when the values sum to zero.
int retained_rank(std::span<const double> values, double tolerance);

Spectrum make_spectrum(std::vector<double> values, double tolerance);

/// Affine reduced space offset + span(columns); columns are orthonormal.
struct ReducedBasis {
  Matrix columns;
  Vector offset;
  Spectrum spectrum;

  Index rank() const { return columns.cols(); }
  Index dim() const { return columns.rows(); }
};

/// Full-order snapshots, one per column, and the parameters that produced them.
struct SnapshotSet {
  Matrix X;
  std::vector<std::vector<double>> params;

  Index size() const { return X.cols(); }
  Index dim() const { return X.rows(); }
  /// Throws `Errc::dimension` / `Errc::numerical` on a broken invariant.
  void validate() const;
  Vector mean() const;
  Matrix select(std::span<const Index> columns) const;
};

/// Leading left singular vectors of `M`, rank chosen by `retained_rank` on
/// its singular values. Offset is zero.
ReducedBasis svd_truncate(const Matrix& M, double tolerance);

/// Global POD basis of the mean-centered snapshots; offset is the snapshot mean.
ReducedBasis centered_pod(const SnapshotSet& X, double tolerance);

/// Euclidean relative error |u - ref| / |ref|.
double relative_error(const Vector& u, const Vector& reference);

/// x = offset + U w with [U^T K U] w = U^T (f - K offset).
Vector rb_solve_galerkin(const Matrix& K, const Vector& f, const ReducedBasis& basis);
Vector rb_solve_galerkin(const SparseMatrix& K, const Vector& f, const ReducedBasis& basis);

/// x = offset + U w with [U^T K^T K U] w = U^T K^T (f - K offset).
Vector rb_solve_least_squares(const Matrix& K, const Vector& f, const ReducedBasis& basis);
Vector rb_solve_least_squares(const SparseMatrix& K, const Vector& f, const ReducedBasis& basis);

/// sqrt(x^T K x) for symmetric positive definite K.
double energy_norm(const Vector& x, const Matrix& K);
double energy_norm(const Vector& x, const SparseMatrix& K);

/// Centered linear columns (x^i - mean) followed by the Hadamard products
/// (x^i - mean) .* (x^j - mean) for i <= j in lexicographic order.
Matrix quadratic_basis(const Matrix& snapshots, const Vector& mean);

constexpr Index quadratic_column_count(Index n) { return n + n * (n + 1) / 2; }

/// Solves a small dense system by partial-pivoting LU, throwing
/// `IllConditioned` when the reciprocal condition estimate is too small.
Vector solve_dense_checked(const Matrix& A, const Vector& b);

}  // namespace kpod
