#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "kpod/linalg.hpp"

namespace kpod::adv2d {

/// Boundary markers; the numeric values are the ones written to mesh files.
enum class Marker : int {
  interior = 0,
  dirichlet = 1,  // x = -1, corners included
  bottom = 2,
  right = 3,
  top = 4,
  circle = 5,
  left = 6,  // left side outside the Dirichlet part (unused by the generator)
};

using Point = std::array<double, 2>;
using Triangle = std::array<Index, 3>;

/// Linear-triangle mesh of [-1,1]^2 minus a centred disc. Triangles are CCW.
struct Mesh2D {
  std::vector<Point> nodes;
  std::vector<Triangle> triangles;
  std::vector<Marker> markers;
  double h = 0.0;
  double hole_radius = 0.0;

  Index node_count() const { return std::ssize(nodes); }
  Index triangle_count() const { return std::ssize(triangles); }
  /// Signed area of triangle t (positive for CCW).
  double area(Index t) const;
  /// Throws `Errc::numerical` on a non-positive area or a circle node off the circle.
  void validate() const;
};

bool operator==(const Mesh2D& a, const Mesh2D& b);

/// Structured grid of 2/h (rounded up to an even number) cells per side, each
/// split along its (1,-1) diagonal. Triangles with every vertex inside or on
/// the circle are dropped; the remaining inside nodes and the nodes on the hole
/// boundary are pushed radially onto the circle. A hole radius of 0 gives the
/// full square.
Mesh2D build_mesh_2d(double h, double hole_radius = 0.3);

/// Text format: `nodes N triangles T`, then N lines `x y marker`, then T lines
/// `i j k` (1-based). Coordinates are written in shortest round-trip form.
void write_mesh(std::ostream& out, const Mesh2D& mesh);
/// Throws `Errc::parse` with the offending line number.
Mesh2D read_mesh(std::istream& in, const std::string& source = "<stream>");

void save_mesh(const std::filesystem::path& path, const Mesh2D& mesh);
Mesh2D load_mesh(const std::filesystem::path& path);

}  // namespace kpod::adv2d
