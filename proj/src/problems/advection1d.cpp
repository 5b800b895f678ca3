#include "kpod/problems/advection1d.hpp"

#include <cmath>

#include "kpod/error.hpp"
#include "kpod/parallel.hpp"

namespace kpod::adv1d {

std::vector<double> Grid1D::interior_nodes() const {
  std::vector<double> x(static_cast<std::size_t>(unknowns()));
  const double h = spacing();
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = begin + h * static_cast<double>(i + 1);
  return x;
}

Vector Tridiagonal::operator*(const Vector& x) const {
  const Index n = size();
  if (x.size() != n) throw Error(Errc::dimension, "tridiagonal product: size mismatch");
  Vector y = diag.cwiseProduct(x);
  for (Index i = 0; i + 1 < n; ++i) {
    y[i] += upper[i] * x[i + 1];
    y[i + 1] += lower[i] * x[i];
  }
  return y;
}

Vector Tridiagonal::solve(const Vector& b) const {
  const Index n = size();
  if (b.size() != n) throw Error(Errc::dimension, "tridiagonal solve: size mismatch");
  Vector c(n), d(n);
  double denom = diag[0];
  if (denom == 0.0) throw Error(Errc::numerical, "tridiagonal solve: zero pivot");
  c[0] = n > 1 ? upper[0] / denom : 0.0;
  d[0] = b[0] / denom;
  for (Index i = 1; i < n; ++i) {
    denom = diag[i] - lower[i - 1] * c[i - 1];
    if (denom == 0.0) throw Error(Errc::numerical, "tridiagonal solve: zero pivot");
    c[i] = i + 1 < n ? upper[i] / denom : 0.0;
    d[i] = (b[i] - lower[i - 1] * d[i - 1]) / denom;
  }
  Vector x(n);
  x[n - 1] = d[n - 1];
  for (Index i = n - 2; i >= 0; --i) x[i] = d[i] - c[i] * x[i + 1];
  return x;
}

SparseMatrix Tridiagonal::to_sparse() const {
  const Index n = size();
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, diag[i]);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, upper[i]);
      t.emplace_back(i + 1, i, lower[i]);
    }
  }
  SparseMatrix S(n, n);
  S.setFromTriplets(t.begin(), t.end());
  return S;
}

CrankNicolson assemble_1d(double velocity, const Grid1D& grid) {
  return assemble_1d(velocity, grid, grid.diffusivity);
}

CrankNicolson assemble_1d(double velocity, const Grid1D& grid, double diffusivity) {
  if (grid.n_intervals < 3) throw Error(Errc::usage, "1D grid needs at least 3 intervals");
  const Index n = grid.unknowns();
  const double h = grid.spacing();
  // Spatial operator M = v C - nu L, so that u_t = -M u.
  const double m_lower = -velocity / (2.0 * h) - diffusivity / (h * h);
  const double m_diag = 2.0 * diffusivity / (h * h);
  const double m_upper = velocity / (2.0 * h) - diffusivity / (h * h);
  const double half = 0.5 * grid.dt;

  CrankNicolson cn;
  cn.A.lower = Vector::Constant(n - 1, half * m_lower);
  cn.A.diag = Vector::Constant(n, 1.0 + half * m_diag);
  cn.A.upper = Vector::Constant(n - 1, half * m_upper);
  cn.D.lower = Vector::Constant(n - 1, -half * m_lower);
  cn.D.diag = Vector::Constant(n, 1.0 - half * m_diag);
  cn.D.upper = Vector::Constant(n - 1, -half * m_upper);
  return cn;
}

Vector initial_condition(const Grid1D& grid) {
  const auto x = grid.interior_nodes();
  Vector u(std::ssize(x));
  for (Index i = 0; i < u.size(); ++i) {
    const double s = (x[static_cast<std::size_t>(i)] - 0.6) / 0.02;
    u[i] = std::exp(-0.5 * s * s);
  }
  return u;
}

double mass(const Vector& u, const Grid1D& grid) {
  // Trapezoid with zero end values reduces to h * sum of interior values.
  return grid.spacing() * u.sum();
}

Trajectory integrate_full(double velocity, const Grid1D& grid, int n_steps) {
  const CrankNicolson cn = assemble_1d(velocity, grid);
  Trajectory tr;
  tr.states.reserve(static_cast<std::size_t>(n_steps + 1));
  tr.states.push_back(initial_condition(grid));
  for (int n = 0; n < n_steps; ++n) tr.states.push_back(cn.A.solve(cn.D * tr.states.back()));
  return tr;
}

Trajectory integrate_pod(double velocity, const Grid1D& grid, int n_steps, const ReducedBasis& pod) {
  const CrankNicolson cn = assemble_1d(velocity, grid);
  const SparseMatrix A = cn.A.to_sparse();
  Trajectory tr;
  tr.states.push_back(initial_condition(grid));
  for (int n = 0; n < n_steps; ++n) {
    try {
      tr.states.push_back(rb_solve_galerkin(A, cn.D * tr.states.back(), pod));
    } catch (const Error& e) {
      throw Error(e.code(), "POD march failed at step " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return tr;
}

Trajectory integrate_kpod(double velocity, const Grid1D& grid, int n_steps, const OnlineContext& ctx,
                          int base_level) {
  const CrankNicolson cn = assemble_1d(velocity, grid);
  const SparseMatrix A = cn.A.to_sparse();
  Trajectory tr;
  tr.states.push_back(initial_condition(grid));
  for (int n = 0; n < n_steps; ++n) {
    const Vector& previous = tr.states.back();
    const Vector f = cn.D * previous;
    GuessContext guess;
    guess.previous_state = &previous;
    try {
      const Vector z0 = init_guess(GuessMode::from_previous_step, guess, *ctx.kpca);
      PathResult r = optimal_path(z0, base_level, A, f, ctx);
      tr.path_solves.push_back(static_cast<int>(r.trace.solves()));
      tr.path_mean_rank.push_back(r.trace.mean_rank());
      tr.path_status.push_back(r.trace.status);
      tr.states.push_back(std::move(r.x));
    } catch (const Error& e) {
      throw Error(e.code(), "kPOD march failed at step " + std::to_string(n + 1) + ": " + e.what());
    }
  }
  return tr;
}

std::vector<double> training_velocities() {
  std::vector<double> v(10);
  for (int i = 0; i < 10; ++i) v[static_cast<std::size_t>(i)] = 1.0 + static_cast<double>(i) / 9.0;
  return v;
}

SnapshotSet campaign_1d(const Grid1D& grid, int jobs) {
  constexpr int stride = 5;
  const auto velocities = training_velocities();
  const int per_velocity = grid.n_steps / stride;
  const Index n_s = 1 + static_cast<Index>(velocities.size()) * per_velocity;

  SnapshotSet set;
  set.X.resize(grid.unknowns(), n_s);
  set.params.assign(static_cast<std::size_t>(n_s), {});
  set.X.col(0) = initial_condition(grid);
  set.params[0] = {0.0, 0.0};

  parallel_for(velocities.size(), jobs, [&](std::size_t m) {
    const double v = velocities[m];
    const CrankNicolson cn = assemble_1d(v, grid);
    Vector u = initial_condition(grid);
    for (int n = 1; n <= grid.n_steps; ++n) {
      u = cn.A.solve(cn.D * u);
      if (n % stride == 0) {
        const Index col = 1 + static_cast<Index>(m) * per_velocity + (n / stride - 1);
        set.X.col(col) = u;
        set.params[static_cast<std::size_t>(col)] = {v, grid.dt * n};
      }
    }
  });
  return set;
}

}  // namespace kpod::adv1d
