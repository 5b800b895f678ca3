#include "kpod/problems/mesh2d.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "kpod/error.hpp"

namespace kpod::adv2d {

namespace {

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

Marker classify(const Point& p, bool on_hole) {
  if (p[0] == -1.0) return Marker::dirichlet;
  if (p[1] == -1.0) return Marker::bottom;
  if (p[0] == 1.0) return Marker::right;
  if (p[1] == 1.0) return Marker::top;
  return on_hole ? Marker::circle : Marker::interior;
}

// Nodes on edges that belong to a single triangle and are not on the square.
std::vector<bool> hole_boundary_nodes(const Mesh2D& m) {
  std::map<std::pair<Index, Index>, int> edges;
  for (const auto& t : m.triangles)
    for (int e = 0; e < 3; ++e) {
      const Index a = t[e], b = t[(e + 1) % 3];
      ++edges[{std::min(a, b), std::max(a, b)}];
    }
  std::vector<bool> on(m.nodes.size(), false);
  const auto on_square = [&](Index i) {
    const Point& p = m.nodes[static_cast<std::size_t>(i)];
    return std::abs(p[0]) == 1.0 || std::abs(p[1]) == 1.0;
  };
  for (const auto& [e, count] : edges) {
    if (count != 1) continue;
    if (on_square(e.first) && on_square(e.second)) continue;
    on[static_cast<std::size_t>(e.first)] = true;
    on[static_cast<std::size_t>(e.second)] = true;
  }
  return on;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

double Mesh2D::area(Index t) const {
  const Triangle& tri = triangles[static_cast<std::size_t>(t)];
  return signed_area(nodes[static_cast<std::size_t>(tri[0])], nodes[static_cast<std::size_t>(tri[1])],
                     nodes[static_cast<std::size_t>(tri[2])]);
}

void Mesh2D::validate() const {
  if (markers.size() != nodes.size()) throw Error(Errc::dimension, "mesh: marker count differs from node count");
  for (Index t = 0; t < triangle_count(); ++t) {
    for (Index v : triangles[static_cast<std::size_t>(t)])
      if (v < 0 || v >= node_count()) throw Error(Errc::dimension, "mesh: triangle references a missing node");
    if (!(area(t) > 0.0))
      throw Error(Errc::numerical, "mesh: triangle " + std::to_string(t + 1) + " has non-positive area");
  }
  if (hole_radius > 0.0) {
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (markers[i] != Marker::circle) continue;
      const double r = std::hypot(nodes[i][0], nodes[i][1]);
      if (std::abs(r - hole_radius) > 1e-10 * h)
        throw Error(Errc::numerical, "mesh: circle node " + std::to_string(i + 1) + " is off the circle");
    }
  }
}

bool operator==(const Mesh2D& a, const Mesh2D& b) {
  return a.nodes == b.nodes && a.triangles == b.triangles && a.markers == b.markers;
}

Mesh2D build_mesh_2d(double h, double hole_radius) {
  if (!(h > 0.0 && h < 0.3)) throw Error(Errc::usage, "mesh size h must lie in (0, 0.3)");
  if (!(hole_radius >= 0.0 && hole_radius < 1.0)) throw Error(Errc::usage, "hole radius must lie in [0, 1)");
  Index cells = static_cast<Index>(std::ceil(2.0 / h - 1e-9));
  if (cells % 2 != 0) ++cells;  // keeps a grid node at the centre
  const Index side = cells + 1;
  const auto id = [side](Index i, Index j) { return j * side + i; };

  std::vector<Point> grid(static_cast<std::size_t>(side * side));
  for (Index j = 0; j < side; ++j)
    for (Index i = 0; i < side; ++i)
      grid[static_cast<std::size_t>(id(i, j))] = {static_cast<double>(2 * i - cells) / static_cast<double>(cells),
                                                  static_cast<double>(2 * j - cells) / static_cast<double>(cells)};

  const double r2 = hole_radius * hole_radius;
  const auto inside = [&](Index v) {
    const Point& p = grid[static_cast<std::size_t>(v)];
    return p[0] * p[0] + p[1] * p[1] < r2;
  };

  // Nodes lying on the circle count as inside when deciding which triangles to drop.
  const auto covered = [&](Index v) {
    const Point& p = grid[static_cast<std::size_t>(v)];
    return p[0] * p[0] + p[1] * p[1] <= r2 * (1.0 + 1e-12);
  };
  std::vector<Triangle> tris;
  const auto add = [&](Index a, Index b, Index c) {
    if (!(covered(a) && covered(b) && covered(c))) tris.push_back({a, b, c});
  };
  for (Index j = 0; j < cells; ++j)
    for (Index i = 0; i < cells; ++i) {
      const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      add(a, b, d);
      add(b, c, d);
    }

  // On coarse grids the centre node can survive; its triangles are dropped.
  if (hole_radius > 0.0) {
    const Index centre = id(cells / 2, cells / 2);
    std::erase_if(tris, [&](const Triangle& t) { return std::ranges::find(t, centre) != t.end(); });
  }

  // Inside nodes and hole-boundary nodes go radially onto the circle. A
  // projected node can land on a grid node that already sits there; such pairs
  // are merged and the triangles they collapse are dropped.
  std::vector<bool> on_hole(grid.size(), false);
  if (hole_radius > 0.0) {
    Mesh2D topo;
    topo.nodes = grid;
    topo.triangles = tris;
    on_hole = hole_boundary_nodes(topo);
  }
  std::vector<Point> pos = grid;
  std::vector<Index> rep(grid.size());
  std::map<std::pair<long long, long long>, Index> seen;
  const double quantum = 1e-9 * (2.0 / static_cast<double>(cells));
  for (std::size_t v = 0; v < grid.size(); ++v) {
    rep[v] = static_cast<Index>(v);
    if (inside(static_cast<Index>(v)) || on_hole[v]) {
      const double r = std::hypot(pos[v][0], pos[v][1]);
      if (r == 0.0) continue;
      pos[v] = {pos[v][0] * hole_radius / r, pos[v][1] * hole_radius / r};
    }
    const std::pair<long long, long long> key{std::llround(pos[v][0] / quantum), std::llround(pos[v][1] / quantum)};
    const auto [it, fresh] = seen.emplace(key, static_cast<Index>(v));
    if (!fresh) rep[v] = it->second;
  }
  std::vector<Triangle> kept;
  kept.reserve(tris.size());
  for (Triangle t : tris) {
    for (Index& v : t) v = rep[static_cast<std::size_t>(v)];
    if (t[0] != t[1] && t[1] != t[2] && t[0] != t[2]) kept.push_back(t);
  }

  // Compact to the nodes still in use.
  std::vector<Index> remap(grid.size(), -1);
  Mesh2D mesh;
  mesh.h = 2.0 / static_cast<double>(cells);
  mesh.hole_radius = hole_radius;
  for (auto& t : kept)
    for (Index& v : t) {
      Index& slot = remap[static_cast<std::size_t>(v)];
      if (slot < 0) {
        slot = mesh.node_count();
        mesh.nodes.push_back(pos[static_cast<std::size_t>(v)]);
      }
      v = slot;
    }
  mesh.triangles = std::move(kept);

  for (Index t = 0; t < mesh.triangle_count(); ++t)
    if (!(mesh.area(t) > 1e-6 * mesh.h * mesh.h))
      throw Error(Errc::numerical, "mesh: projection onto the circle inverted triangle " + std::to_string(t + 1) +
                                       "; choose a different h");

  const auto hole = hole_boundary_nodes(mesh);
  mesh.markers.resize(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) mesh.markers[i] = classify(mesh.nodes[i], hole[i]);
  mesh.validate();
  return mesh;
}

void write_mesh(std::ostream& out, const Mesh2D& mesh) {
  out << "nodes " << mesh.node_count() << " triangles " << mesh.triangle_count() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    out << format_double(mesh.nodes[i][0]) << ' ' << format_double(mesh.nodes[i][1]) << ' '
        << static_cast<int>(mesh.markers[i]) << '\n';
  for (const auto& t : mesh.triangles) out << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
}

Mesh2D read_mesh(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  const auto fail = [&](const std::string& what) -> Error {
    return Error(Errc::parse, source + ":" + std::to_string(line_no) + ": " + what);
  };
  const auto next = [&]() {
    if (!std::getline(in, line)) {
      ++line_no;
      throw fail("unexpected end of file");
    }
    ++line_no;
  };

  next();
  std::istringstream header(line);
  std::string w1, w2;
  long n_nodes = -1, n_tris = -1;
  if (!(header >> w1 >> n_nodes >> w2 >> n_tris) || w1 != "nodes" || w2 != "triangles" || n_nodes < 0 || n_tris < 0)
    throw fail("expected header 'nodes N triangles T'");

  Mesh2D mesh;
  mesh.nodes.reserve(static_cast<std::size_t>(n_nodes));
  mesh.markers.reserve(static_cast<std::size_t>(n_nodes));
  for (long i = 0; i < n_nodes; ++i) {
    next();
    std::istringstream ls(line);
    std::string xs, ys;
    int marker = -1;
    if (!(ls >> xs >> ys >> marker)) throw fail("expected 'x y marker'");
    Point p{};
    for (int c = 0; c < 2; ++c) {
      const std::string& s = c == 0 ? xs : ys;
      const auto r = std::from_chars(s.data(), s.data() + s.size(), p[static_cast<std::size_t>(c)]);
      if (r.ec != std::errc{} || r.ptr != s.data() + s.size()) throw fail("bad coordinate '" + s + "'");
    }
    if (marker < 0 || marker > 6) throw fail("unknown boundary marker " + std::to_string(marker));
    mesh.nodes.push_back(p);
    mesh.markers.push_back(static_cast<Marker>(marker));
  }
  mesh.triangles.reserve(static_cast<std::size_t>(n_tris));
  for (long t = 0; t < n_tris; ++t) {
    next();
    std::istringstream ls(line);
    long a = 0, b = 0, c = 0;
    if (!(ls >> a >> b >> c)) throw fail("expected 'i j k'");
    for (long v : {a, b, c})
      if (v < 1 || v > n_nodes) throw fail("node index " + std::to_string(v) + " out of range");
    mesh.triangles.push_back({a - 1, b - 1, c - 1});
  }

  // Recover h from the outer boundary and the radius from the circle nodes.
  double edge_sum = 0.0;
  long edge_count = 0;
  for (const auto& t : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const Point& p = mesh.nodes[static_cast<std::size_t>(t[e])];
      const Point& q = mesh.nodes[static_cast<std::size_t>(t[(e + 1) % 3])];
      if ((p[1] == -1.0 && q[1] == -1.0) || (p[1] == 1.0 && q[1] == 1.0)) {
        edge_sum += std::abs(p[0] - q[0]);
        ++edge_count;
      }
    }
  mesh.h = edge_count > 0 ? edge_sum / static_cast<double>(edge_count) : 0.0;
  double r_sum = 0.0;
  long r_count = 0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    if (mesh.markers[i] == Marker::circle) {
      r_sum += std::hypot(mesh.nodes[i][0], mesh.nodes[i][1]);
      ++r_count;
    }
  mesh.hole_radius = r_count > 0 ? r_sum / static_cast<double>(r_count) : 0.0;
  try {
    mesh.validate();
  } catch (const Error& e) {
    throw Error(Errc::parse, source + ": " + e.what());
  }
  return mesh;
}

void save_mesh(const std::filesystem::path& path, const Mesh2D& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  write_mesh(out, mesh);
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

Mesh2D load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return read_mesh(in, path.string());
}

}  // namespace kpod::adv2d
