#include "kpod/geometry.hpp"

#include <algorithm>
#include <numeric>

#include "kpod/error.hpp"

namespace kpod {

ReducedGeometry build_geometry(const Matrix& Z) {
  const int k = static_cast<int>(Z.rows());
  const Index n = Z.cols();
  if (n < 1 || k < 1) throw Error(Errc::dimension, "build_geometry: empty reduced cloud");
  if (k > 3) throw Error(Errc::usage, "reduced dimension above 3 is not supported by the tessellation");
  if (!Z.allFinite()) throw Error(Errc::numerical, "build_geometry: non-finite reduced coordinates");

  ReducedGeometry geom;
  geom.Z = Z;
  if (k == 1) {
    if (n > 1 && Z.row(0).maxCoeff() == Z.row(0).minCoeff())
      throw Error(Errc::numerical, "degenerate reduced cloud");
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return Z(0, a) < Z(0, b); });
    geom.adjacency.assign(static_cast<std::size_t>(n), {});
    for (std::size_t r = 0; r < order.size(); ++r) {
      auto& adj = geom.adjacency[static_cast<std::size_t>(order[r])];
      if (r > 0) adj.push_back(order[r - 1]);
      if (r + 1 < order.size()) adj.push_back(order[r + 1]);
      std::sort(adj.begin(), adj.end());
    }
  } else {
    if (n > 1 && (Z.rowwise().maxCoeff() - Z.rowwise().minCoeff()).norm() == 0.0)
      throw Error(Errc::numerical, "degenerate reduced cloud");
    geom.adjacency = n > 1 ? delaunay_adjacency(Z) : std::vector<std::vector<Index>>(1);
  }
  return geom;
}

Index locate_cell(const Vector& z, const ReducedGeometry& geom) {
  if (z.size() != geom.Z.rows()) throw Error(Errc::dimension, "locate_cell: dimension mismatch");
  Index best = 0;
  double best_d = (geom.Z.col(0) - z).squaredNorm();
  for (Index i = 1; i < geom.size(); ++i) {
    const double d = (geom.Z.col(i) - z).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

Index min_patch_count(int k, int level) {
  const Index base = 2 * level + 1;
  return k == 1 ? base : base * k + 1;
}

Patch patch(Index center, int level, const ReducedGeometry& geom) {
  if (level < 1) throw Error(Errc::usage, "patch level must be at least 1");
  const Index n = geom.size();
  if (center < 0 || center >= n) throw Error(Errc::dimension, "patch: center index out of range");

  // Built level by level so that each level keeps the previous level's top-up.
  std::vector<char> reached(static_cast<std::size_t>(n), 0), member(static_cast<std::size_t>(n), 0);
  std::vector<Index> frontier{center};
  reached[static_cast<std::size_t>(center)] = member[static_cast<std::size_t>(center)] = 1;
  Index count = 1;
  const Vector zc = geom.Z.col(center);
  for (int l = 1; l <= level; ++l) {
    std::vector<Index> next;
    for (Index i : frontier)
      for (Index j : geom.adjacency[static_cast<std::size_t>(i)])
        if (!reached[static_cast<std::size_t>(j)]) {
          reached[static_cast<std::size_t>(j)] = 1;
          next.push_back(j);
          if (!member[static_cast<std::size_t>(j)]) {
            member[static_cast<std::size_t>(j)] = 1;
            ++count;
          }
        }
    frontier = std::move(next);

    const Index wanted = std::min(min_patch_count(geom.dim(), l), n);
    if (count >= wanted) continue;
    std::vector<Index> rest;
    for (Index i = 0; i < n; ++i)
      if (!member[static_cast<std::size_t>(i)]) rest.push_back(i);
    std::stable_sort(rest.begin(), rest.end(), [&](Index a, Index b) {
      return (geom.Z.col(a) - zc).squaredNorm() < (geom.Z.col(b) - zc).squaredNorm();
    });
    for (std::size_t r = 0; count < wanted; ++r, ++count) member[static_cast<std::size_t>(rest[r])] = 1;
  }

  Patch p{center, level, {}};
  for (Index i = 0; i < n; ++i)
    if (member[static_cast<std::size_t>(i)]) p.members.push_back(i);
  return p;
}

Patch full_patch(Index center, int level, Index n) {
  Patch p{center, level, std::vector<Index>(static_cast<std::size_t>(n))};
  std::iota(p.members.begin(), p.members.end(), Index{0});
  return p;
}

}  // namespace kpod
