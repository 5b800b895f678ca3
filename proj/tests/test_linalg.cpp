#include "doctest.h"

#include <cmath>
#include <numeric>

#include "kpod/error.hpp"
#include "kpod/linalg.hpp"
#include "kpod/problems/advection1d.hpp"
#include "test_support.hpp"

using namespace kpod;

namespace {

double max_orthonormality_defect(const Matrix& U) {
  return (U.transpose() * U - Matrix::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

// Smallest k whose partial sum reaches (1 - eps) of the total, by direct scan.
int scan_rank(const std::vector<double>& s, double eps) {
  const double total = std::accumulate(s.begin(), s.end(), 0.0);
  double partial = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    partial += s[k];
    if (partial >= (1.0 - eps) * total) return static_cast<int>(k + 1);
  }
  return static_cast<int>(s.size());
}

}  // namespace

TEST_SUITE("linalg") {

TEST_CASE("identity keeps every direction") {
  const ReducedBasis b = svd_truncate(Matrix::Identity(3, 3), 1e-8);
  CHECK(b.rank() == 3);
  CHECK((b.columns.cwiseAbs() * b.columns.cwiseAbs().transpose() - Matrix::Identity(3, 3)).norm() < 1e-14);
  CHECK(b.offset.isZero());
}

TEST_CASE("imposed spectrum 10, 1, 1e-6, 1e-9 truncates to 2 at 1e-4") {
  const Matrix U = test::random_orthonormal(6, 4, 11);
  const Matrix V = test::random_orthonormal(4, 4, 12);
  const std::vector<double> sigma = {10.0, 1.0, 1e-6, 1e-9};
  Vector s(4);
  for (int i = 0; i < 4; ++i) s[i] = sigma[static_cast<std::size_t>(i)];
  const Matrix M = U * s.asDiagonal() * V.transpose();
  const ReducedBasis b = svd_truncate(M, 1e-4);
  CHECK(scan_rank(sigma, 1e-4) == 2);
  CHECK(b.rank() == 2);
  for (int i = 0; i < 4; ++i) CHECK(b.spectrum.values[static_cast<std::size_t>(i)] == doctest::Approx(sigma[static_cast<std::size_t>(i)]).epsilon(1e-9));
  CHECK(max_orthonormality_defect(b.columns) < 1e-10);
}

TEST_CASE("all-zero matrix is degenerate") {
  try {
    svd_truncate(Matrix::Zero(4, 3), 1e-8);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::numerical);
    CHECK(std::string(e.what()).find("degenerate matrix") != std::string::npos);
  }
}

TEST_CASE("retained rank tie keeps the smaller k") {
  const std::vector<double> v = {1.0, 1.0, 1.0, 1.0};
  CHECK(retained_rank(v, 0.5) == 2);
  CHECK(retained_rank(v, 0.25) == 3);
  CHECK_THROWS_AS(retained_rank(v, 0.0), Error);
  CHECK_THROWS_AS(retained_rank(v, 1.0), Error);
}

TEST_CASE("truncation is monotone in the tolerance") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    Matrix M = test::random_matrix(30, 12, seed);
    // Graded columns give a spread spectrum.
    for (Index j = 0; j < M.cols(); ++j) M.col(j) *= std::pow(0.3, static_cast<double>(j));
    int previous = 1 << 30;
    for (double eps : {1e-12, 1e-9, 1e-6, 1e-4, 1e-2, 1e-1, 0.5}) {
      const ReducedBasis b = svd_truncate(M, eps);
      CHECK(b.rank() <= previous);
      CHECK(b.rank() == scan_rank(b.spectrum.values, eps));
      CHECK(max_orthonormality_defect(b.columns) < 1e-10);
      previous = static_cast<int>(b.rank());
    }
  }
}

TEST_CASE("Galerkin and least squares on the identity") {
  const Matrix K = Matrix::Identity(5, 5);
  Vector f = Vector::Zero(5);
  f[0] = 3.0;
  f[1] = 5.0;
  ReducedBasis b;
  b.columns = Matrix::Identity(5, 2);
  b.offset = Vector::Zero(5);
  const Vector xg = rb_solve_galerkin(K, f, b);
  const Vector xl = rb_solve_least_squares(K, f, b);
  CHECK((xg - f).norm() == 0.0);
  CHECK((xl - xg).norm() == 0.0);
}

TEST_CASE("reduced solves recover the exact solution when it lies in the span") {
  const Matrix K = test::random_spd(8, 21);
  const Vector f = test::random_matrix(8, 1, 22).col(0);
  const Vector exact = K.lu().solve(f);
  const Vector offset = test::random_matrix(8, 1, 23).col(0);
  Matrix cols(8, 3);
  cols.col(0) = exact - offset;
  cols.rightCols(2) = test::random_matrix(8, 2, 24);
  const ReducedBasis b = test::basis_from(cols, offset);
  CHECK(relative_error(rb_solve_galerkin(K, f, b), exact) < 1e-10);
  CHECK(relative_error(rb_solve_least_squares(K, f, b), exact) < 1e-9);

  const SparseMatrix Ks = K.sparseView();
  CHECK(relative_error(rb_solve_galerkin(Ks, f, b), exact) < 1e-10);
  CHECK(relative_error(rb_solve_least_squares(Ks, f, b), exact) < 1e-9);
}

TEST_CASE("Galerkin orthogonality and energy optimality for SPD operators") {
  const Matrix K = test::random_spd(12, 31);
  const Vector f = test::random_matrix(12, 1, 32).col(0);
  const Vector exact = K.lu().solve(f);
  const ReducedBasis b = test::basis_from(test::random_matrix(12, 4, 33), test::random_matrix(12, 1, 34).col(0));
  const Vector x = rb_solve_galerkin(K, f, b);
  CHECK((b.columns.transpose() * (f - K * x)).norm() <= 1e-9 * (b.columns.transpose() * f).norm());
  const double best = energy_norm(exact - x, K);
  for (std::uint64_t probe = 0; probe < 20; ++probe) {
    const Vector w = test::random_matrix(4, 1, 100 + probe).col(0);
    const Vector other = b.offset + b.columns * w;
    CHECK(best <= energy_norm(exact - other, K) * (1 + 1e-12));
  }
}

TEST_CASE("singular reduced matrix reports its condition estimate") {
  Matrix K = Matrix::Identity(4, 4);
  K(0, 0) = 0.0;
  ReducedBasis b;
  b.columns = Matrix::Identity(4, 2);
  b.offset = Vector::Zero(4);
  try {
    rb_solve_galerkin(K, Vector::Ones(4), b);
    FAIL("expected IllConditioned");
  } catch (const IllConditioned& e) {
    CHECK(e.condition() > kMaxReducedCondition);
  }
}

TEST_CASE("energy norm") {
  CHECK(energy_norm(Vector::Zero(3), Matrix::Identity(3, 3)) == 0.0);
  CHECK(energy_norm(Vector::Ones(3), Matrix(2.0 * Matrix::Identity(3, 3))) == doctest::Approx(std::sqrt(6.0)));
  const Matrix K = test::random_spd(5, 41);
  const Vector x = test::random_matrix(5, 1, 42).col(0);
  CHECK(energy_norm(x, K) == doctest::Approx(std::sqrt(x.dot(K * x))).epsilon(1e-14));
  const SparseMatrix Ks = K.sparseView();
  CHECK(energy_norm(x, Ks) == doctest::Approx(std::sqrt(x.dot(K * x))).epsilon(1e-14));

  Matrix nonsym = K;
  nonsym(0, 1) += 1.0;
  CHECK_THROWS_WITH_AS(energy_norm(x, nonsym), doctest::Contains("energy norm undefined"), Error);
  const Matrix indefinite = -K;
  CHECK_THROWS_WITH_AS(energy_norm(x, indefinite), doctest::Contains("energy norm undefined"), Error);
}

TEST_CASE("quadratic basis layout") {
  Matrix one(2, 1);
  one << 1.0, 2.0;
  const Matrix B = quadratic_basis(one, Vector::Zero(2));
  REQUIRE(B.cols() == 2);
  CHECK(B(0, 0) == 1.0);
  CHECK(B(1, 0) == 2.0);
  CHECK(B(0, 1) == 1.0);
  CHECK(B(1, 1) == 4.0);

  CHECK(quadratic_column_count(3) == 9);
  CHECK(quadratic_column_count(60) == 1890);
  const Matrix X = test::random_matrix(7, 3, 51);
  const Vector mean = X.rowwise().mean();
  const Matrix Q = quadratic_basis(X, mean);
  REQUIRE(Q.cols() == 9);
  const Matrix C = X.colwise() - mean;
  // Linear columns, then (0,0), (0,1), (0,2), (1,1), (1,2), (2,2).
  CHECK(Q.leftCols(3) == C);
  CHECK(Q.col(4) == C.col(0).cwiseProduct(C.col(1)));
  CHECK(Q.col(7) == C.col(1).cwiseProduct(C.col(2)));
  CHECK(Q.col(8) == C.col(2).cwiseProduct(C.col(2)));
}

TEST_CASE("centered quadratic basis loses n + 1 directions") {
  // Centered columns sum to zero, so C_i .* sum_j C_j = 0 for every i, and one
  // linear column is redundant as well.
  const Matrix X = test::random_matrix(200, 6, 52);
  const Matrix Q = quadratic_basis(X, X.rowwise().mean());
  Eigen::JacobiSVD<Matrix> svd(Q);
  const auto& s = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) rank += s[i] > 1e-10 * s[0];
  CHECK(rank == quadratic_column_count(6) - 6 - 1);
}

TEST_CASE("global POD of the 1D training set") {
  const SnapshotSet X = adv1d::campaign_1d();
  const ReducedBasis pod = centered_pod(X, 1e-8);
  MESSAGE("1D POD rank at 1e-8: " << pod.rank());
  CHECK(pod.rank() >= 70);
  CHECK(pod.rank() <= 80);
  CHECK(max_orthonormality_defect(pod.columns) < 1e-10);
  CHECK((pod.offset - X.mean()).norm() == 0.0);

  SUBCASE("reduced solve at a training parameter improves on the mean") {
    const adv1d::Grid1D grid;
    const auto cn = adv1d::assemble_1d(X.params[10][0], grid);
    const SparseMatrix A = cn.A.to_sparse();
    const Vector f = cn.D * X.X.col(9);
    const Vector x = rb_solve_galerkin(A, f, pod);
    CHECK((f - A * x).norm() < (f - A * pod.offset).norm());
  }
  SUBCASE("least squares never has a larger residual than Galerkin") {
    const adv1d::Grid1D grid;
    const auto cn = adv1d::assemble_1d(1.5, grid);
    const SparseMatrix A = cn.A.to_sparse();
    for (Index j : {0, 7, 120, 480}) {
      const Vector f = cn.D * X.X.col(j);
      const Vector xg = rb_solve_galerkin(A, f, pod);
      const Vector xl = rb_solve_least_squares(A, f, pod);
      CHECK((f - A * xl).norm() <= (f - A * xg).norm() * (1 + 1e-8));
    }
  }
}

}  // TEST_SUITE
