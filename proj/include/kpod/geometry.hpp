#pragma once

#include <vector>

#include "kpod/linalg.hpp"

namespace kpod {

/// Edge set of a Delaunay triangulation (k = 2) or tetrahedralization (k = 3)
/// of the columns of `points`, as sorted per-vertex neighbour lists.
/// Incremental Bowyer-Watson with a super-simplex; input is perturbed by a
/// deterministic index-seeded jitter of 1e-9 times the cloud diameter.
std::vector<std::vector<Index>> delaunay_adjacency(const Matrix& points);

/// Delaunay 1-ring connectivity of the reduced snapshots.
struct ReducedGeometry {
  Matrix Z;
  std::vector<std::vector<Index>> adjacency;

  int dim() const { return static_cast<int>(Z.rows()); }
  Index size() const { return Z.cols(); }
};

/// k = 1 uses sorted order; k = 2, 3 use `delaunay_adjacency`.
ReducedGeometry build_geometry(const Matrix& Z);

/// Nearest reduced snapshot (Voronoi cell membership); ties go to the lowest index.
Index locate_cell(const Vector& z, const ReducedGeometry& geom);

struct Patch {
  Index center = 0;
  int level = 1;
  std::vector<Index> members;  // sorted, contains center
};

/// (2L+1) for k = 1, (2L+1) k + 1 otherwise.
Index min_patch_count(int k, int level);

/// Snapshots within graph distance `level` of `center`, topped up with the
/// nearest remaining snapshots (in z) to `min_patch_count`.
Patch patch(Index center, int level, const ReducedGeometry& geom);

/// Patch covering every snapshot, used for global quadratic POD.
Patch full_patch(Index center, int level, Index n);

}  // namespace kpod
