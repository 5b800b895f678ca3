#pragma once

#include <string>
#include <vector>

#include "kpod/linalg.hpp"
#include "kpod/online.hpp"

namespace kpod::adv1d {

/// Uniform grid on [begin, end]; the Dirichlet end values are eliminated, so
/// states hold the n_intervals - 1 interior nodes.
struct Grid1D {
  double begin = 0.0;
  double end = 4.0;
  int n_intervals = 2000;
  double dt = 0.005;
  int n_steps = 250;
  double diffusivity = 5e-3;

  double spacing() const { return (end - begin) / n_intervals; }
  Index unknowns() const { return n_intervals - 1; }
  std::vector<double> interior_nodes() const;
};

/// Tridiagonal matrix stored by its three diagonals.
struct Tridiagonal {
  Vector lower;  // size n-1, entry i couples row i+1 to column i
  Vector diag;
  Vector upper;  // size n-1, entry i couples row i to column i+1

  Index size() const { return diag.size(); }
  Vector operator*(const Vector& x) const;
  /// Thomas algorithm without pivoting.
  Vector solve(const Vector& b) const;
  SparseMatrix to_sparse() const;
};

/// Crank-Nicolson pair for u_t + v u_x - nu u_xx = 0 with centered differences:
/// A u^{n+1} = D u^n.
struct CrankNicolson {
  Tridiagonal A;
  Tridiagonal D;
};

CrankNicolson assemble_1d(double velocity, const Grid1D& grid);
CrankNicolson assemble_1d(double velocity, const Grid1D& grid, double diffusivity);

/// Gaussian bump centered at 0.6 with width 0.02 and unit amplitude.
Vector initial_condition(const Grid1D& grid);

/// Integrals of an interior state over the padded grid (trapezoidal).
double mass(const Vector& u, const Grid1D& grid);

/// One run of the march: `states[n]` is the state after n steps (states[0] is
/// the initial condition).
struct Trajectory {
  std::vector<Vector> states;
  /// Solves spent in the optimal path at each step (kPOD only).
  std::vector<int> path_solves;
  /// Mean k-tilde of the optimal path at each step (kPOD only).
  std::vector<double> path_mean_rank;
  std::vector<PathStatus> path_status;

  double time(std::size_t n, const Grid1D& grid) const { return grid.dt * static_cast<double>(n); }
};

Trajectory integrate_full(double velocity, const Grid1D& grid, int n_steps);

/// Global POD march: u^{n+1} = mean + U v with [U^T A U] v = U^T (D u^n - A mean).
Trajectory integrate_pod(double velocity, const Grid1D& grid, int n_steps, const ReducedBasis& pod);

/// kPOD march: an optimal path per step, started from the image of the
/// previous state.
Trajectory integrate_kpod(double velocity, const Grid1D& grid, int n_steps, const OnlineContext& ctx,
                          int base_level);

/// Velocities 1, 1+1/9, ..., 2.
std::vector<double> training_velocities();

/// Initial condition plus the states at n = 5, 10, ..., 250 for each training
/// velocity (501 snapshots); params are (v, t), with v = 0 for the initial state.
SnapshotSet campaign_1d(const Grid1D& grid = {}, int jobs = 1);

}  // namespace kpod::adv1d
