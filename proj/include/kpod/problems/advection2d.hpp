#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kpod/kpca.hpp"
#include "kpod/linalg.hpp"
#include "kpod/problems/mesh2d.hpp"

namespace kpod::adv2d {

using Velocity = std::array<double, 2>;

/// Piecewise-constant velocity, one value per triangle.
using ElementField = std::vector<Velocity>;

enum class FlowDirection { horizontal, vertical };

/// Unit potential flow v = -grad(phi), phi harmonic with grad(phi).n = 1 on the
/// inflow side and -1 on the opposite side (left/right for horizontal,
/// top/bottom for vertical), zero elsewhere; phi is pinned to 0 at node 0.
/// The horizontal field points in +x and the vertical one in -y.
ElementField potential_flow(const Mesh2D& mesh, FlowDirection direction);

/// Full-order system K u = f over all mesh nodes. Dirichlet rows are identity
/// rows carrying the boundary value; their columns are eliminated elsewhere.
struct LinearSystem {
  SparseMatrix K;
  Vector f;
};

/// Galerkin P1 assembly of -div(nu grad u) + v.grad u = 0 with the do-nothing
/// condition away from the Dirichlet nodes. `dirichlet(i)` gives the value at
/// Dirichlet node i.
LinearSystem assemble_advection_diffusion(const Mesh2D& mesh, const ElementField& velocity, double diffusivity,
                                          const std::vector<Index>& dirichlet_nodes,
                                          const std::function<double(Index)>& dirichlet);

struct Params2D {
  double source = 0.0;     // vertical position of the source on the inlet
  double angle_deg = 45.0;  // inclination of the advection field
};

/// The parametrized 2D benchmark on a fixed mesh: both unit flows, the inlet
/// and outlet traces and the Dirichlet node list are computed once.
struct Problem2D {
  Mesh2D mesh;
  ElementField flow_x;
  ElementField flow_y;
  double diffusivity = 1e-2;
  double speed = 10.0;
  std::vector<Index> dirichlet_nodes;
  /// Dirichlet side, parametrized by y in [-1, 1].
  BoundaryTrace inlet;
  /// Bottom then right side, parametrized by arclength s in [0, 4].
  BoundaryTrace outlet;
  /// Nodes on the island boundary.
  std::vector<Index> circle_nodes;

  /// Gaussian source of width 2h centred at `source`.
  double source_value(double y, double source) const;
  ElementField velocity(double angle_deg) const;
  Index dim() const { return mesh.node_count(); }
};

Problem2D make_problem_2d(Mesh2D mesh);

LinearSystem assemble_2d(const Problem2D& problem, const Params2D& params);
/// Same operator with a constant Dirichlet value (diagnostic hook).
LinearSystem assemble_2d_constant(const Problem2D& problem, const Params2D& params, double value);

/// Sparse LU solve; throws `Errc::numerical` if the factorization fails.
Vector solve_full(const LinearSystem& system);

/// Euclidean residual |f - K x|.
double residual_norm(const LinearSystem& system, const Vector& x);

enum class Regime { below, crossing, above };
std::string to_string(Regime r);

/// Crossing when u exceeds 0.1 somewhere on the island boundary; otherwise
/// above when the outlet centroid sits on the right side above y = 0 (s > 3).
Regime classify_regime(const Vector& u, const Problem2D& problem);

KernelSpec make_kernel_2d(const Problem2D& problem, double beta);

inline constexpr std::uint64_t kDefaultSeed2D = 7;

/// `count` parameter pairs uniform in [-0.8, 0.8] x [10, 80] degrees. The
/// uniform variates are built from raw mt19937_64 output, so the list is the
/// same on every platform.
std::vector<Params2D> sample_params_2d(std::size_t count, std::uint64_t seed);

/// Full-order snapshots at `sample_params_2d(count, seed)`; params are
/// (source, angle in degrees).
SnapshotSet campaign_2d(const Problem2D& problem, std::size_t count, std::uint64_t seed, int jobs = 1);

}  // namespace kpod::adv2d
