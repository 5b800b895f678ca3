#include "kpod/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "kpod/error.hpp"

namespace kpod {

double Spectrum::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

double Spectrum::cumulative_fraction(int k) const {
  const double sum = total();
  if (sum <= 0.0) return 0.0;
  const auto end = values.begin() + std::clamp<std::ptrdiff_t>(k, 0, std::ssize(values));
  return std::accumulate(values.begin(), end, 0.0) / sum;
}

int retained_rank(std::span<const double> values, double tolerance) {
  if (!(tolerance > 0.0 && tolerance < 1.0))
    throw Error(Errc::usage, "truncation tolerance must lie in (0,1)");
  const double total = std::accumulate(values.begin(), values.end(), 0.0);
  if (!(total > 0.0)) throw Error(Errc::numerical, "degenerate matrix");
  const double target = (1.0 - tolerance) * total;
  double partial = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    partial += values[k];
    if (partial >= target) return static_cast<int>(k + 1);
  }
  return static_cast<int>(values.size());
}

Spectrum make_spectrum(std::vector<double> values, double tolerance) {
  for (double& v : values) v = std::max(v, 0.0);
  Spectrum s;
  s.rank = retained_rank(values, tolerance);
  s.values = std::move(values);
  s.tolerance = tolerance;
  return s;
}

void SnapshotSet::validate() const {
  if (X.cols() < 1) throw Error(Errc::dimension, "snapshot set is empty");
  if (std::ssize(params) != X.cols())
    throw Error(Errc::dimension, "parameter list length does not match snapshot count");
  if (!X.allFinite()) throw Error(Errc::numerical, "snapshot set contains non-finite entries");
}

Vector SnapshotSet::mean() const { return X.rowwise().mean(); }

Matrix SnapshotSet::select(std::span<const Index> columns) const {
  Matrix out(X.rows(), std::ssize(columns));
  for (Index j = 0; j < out.cols(); ++j) out.col(j) = X.col(columns[j]);
  return out;
}

ReducedBasis svd_truncate(const Matrix& M, double tolerance) {
  if (M.cols() < 1 || M.rows() < 1) throw Error(Errc::dimension, "svd_truncate: empty matrix");
  if (!M.allFinite()) throw Error(Errc::numerical, "svd_truncate: non-finite entries");
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU);
  const Vector& sigma = svd.singularValues();
  std::vector<double> values(sigma.data(), sigma.data() + sigma.size());

  ReducedBasis basis;
  basis.spectrum = make_spectrum(std::move(values), tolerance);
  basis.columns = svd.matrixU().leftCols(basis.spectrum.rank);
  basis.offset = Vector::Zero(M.rows());
  return basis;
}

Vector solve_dense_checked(const Matrix& A, const Vector& b) {
  Eigen::PartialPivLU<Matrix> lu(A);
  const double rcond = lu.rcond();
  const double condition = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
  if (!std::isfinite(condition) || condition > kMaxReducedCondition) {
    std::ostringstream msg;
    msg << "reduced matrix is singular or ill-conditioned (condition estimate " << condition
        << ", size " << A.rows() << ")";
    throw IllConditioned(condition, msg.str());
  }
  return lu.solve(b);
}

namespace {

template <class Op>
void check_solve_shapes(const Op& K, const Vector& f, const ReducedBasis& basis) {
  if (basis.rank() < 1) throw Error(Errc::dimension, "reduced basis has rank 0");
  if (K.rows() != K.cols() || K.rows() != f.size() || basis.dim() != f.size() ||
      basis.offset.size() != f.size())
    throw Error(Errc::dimension, "reduced solve: operator, load and basis sizes disagree");
}

template <class Op>
Vector galerkin(const Op& K, const Vector& f, const ReducedBasis& basis) {
  check_solve_shapes(K, f, basis);
  const Matrix& U = basis.columns;
  const Matrix KU = K * U;
  const Matrix reduced = U.transpose() * KU;
  const Vector rhs = U.transpose() * (f - K * basis.offset);
  const Vector w = solve_dense_checked(reduced, rhs);
  return basis.offset + U * w;
}

template <class Op>
Vector least_squares(const Op& K, const Vector& f, const ReducedBasis& basis) {
  check_solve_shapes(K, f, basis);
  const Matrix KU = K * basis.columns;
  const Matrix reduced = KU.transpose() * KU;
  const Vector rhs = KU.transpose() * (f - K * basis.offset);
  const Vector w = solve_dense_checked(reduced, rhs);
  return basis.offset + basis.columns * w;
}

}  // namespace

Vector rb_solve_galerkin(const Matrix& K, const Vector& f, const ReducedBasis& basis) {
  return galerkin(K, f, basis);
}
Vector rb_solve_galerkin(const SparseMatrix& K, const Vector& f, const ReducedBasis& basis) {
  return galerkin(K, f, basis);
}
Vector rb_solve_least_squares(const Matrix& K, const Vector& f, const ReducedBasis& basis) {
  return least_squares(K, f, basis);
}
Vector rb_solve_least_squares(const SparseMatrix& K, const Vector& f, const ReducedBasis& basis) {
  return least_squares(K, f, basis);
}

double energy_norm(const Vector& x, const Matrix& K) {
  if (K.rows() != K.cols() || K.rows() != x.size())
    throw Error(Errc::dimension, "energy_norm: size mismatch");
  const double scale = std::max(K.cwiseAbs().maxCoeff(), 1e-300);
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error(Errc::numerical, "energy norm undefined: matrix is not symmetric");
  Eigen::LLT<Matrix> llt(K);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::numerical, "energy norm undefined: matrix is not positive definite");
  return (llt.matrixU() * x).norm();
}

double energy_norm(const Vector& x, const SparseMatrix& K) {
  if (K.rows() != K.cols() || K.rows() != x.size())
    throw Error(Errc::dimension, "energy_norm: size mismatch");
  const SparseMatrix diff = K - SparseMatrix(K.transpose());
  double scale = 1e-300, asym = 0.0;
  for (Index c = 0; c < K.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(K, c); it; ++it) scale = std::max(scale, std::abs(it.value()));
  for (Index c = 0; c < diff.outerSize(); ++c)
    for (SparseMatrix::InnerIterator it(diff, c); it; ++it) asym = std::max(asym, std::abs(it.value()));
  if (asym > 1e-10 * scale) throw Error(Errc::numerical, "energy norm undefined: matrix is not symmetric");
  Eigen::SimplicialLLT<SparseMatrix> llt(K);
  if (llt.info() != Eigen::Success)
    throw Error(Errc::numerical, "energy norm undefined: matrix is not positive definite");
  return std::sqrt(std::max(0.0, x.dot(K * x)));
}

Matrix quadratic_basis(const Matrix& snapshots, const Vector& mean) {
  const Index n = snapshots.cols();
  if (n < 1) throw Error(Errc::dimension, "quadratic_basis: no snapshots");
  if (mean.size() != snapshots.rows()) throw Error(Errc::dimension, "quadratic_basis: mean size mismatch");
  const Matrix centered = snapshots.colwise() - mean;
  Matrix B(snapshots.rows(), quadratic_column_count(n));
  B.leftCols(n) = centered;
  Index col = n;
  for (Index i = 0; i < n; ++i)
    for (Index j = i; j < n; ++j) B.col(col++) = centered.col(i).cwiseProduct(centered.col(j));
  return B;
}

ReducedBasis centered_pod(const SnapshotSet& X, double tolerance) {
  X.validate();
  const Vector mean = X.mean();
  ReducedBasis basis = svd_truncate(X.X.colwise() - mean, tolerance);
  basis.offset = mean;
  return basis;
}

double relative_error(const Vector& u, const Vector& reference) {
  if (u.size() != reference.size()) throw Error(Errc::dimension, "relative_error: size mismatch");
  const double ref = reference.norm();
  if (!(ref > 0.0)) throw Error(Errc::numerical, "relative_error: zero reference");
  return (u - reference).norm() / ref;
}

}  // namespace kpod
