#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>

#include "kpod/error.hpp"
#include "kpod/geometry.hpp"

namespace kpod {

namespace {

double hash_unit(std::uint64_t seed) {
  // splitmix64 finalizer mapped to [-1, 1)
  seed += 0x9e3779b97f4a7c15ULL;
  seed = (seed ^ (seed >> 30)) * 0xbf58476d1ce4e5b9ULL;
  seed = (seed ^ (seed >> 27)) * 0x94d049bb133111ebULL;
  seed ^= seed >> 31;
  return static_cast<double>(seed >> 11) * 0x1.0p-52 - 1.0;
}

template <int D>
class BowyerWatson {
 public:
  using Point = Eigen::Matrix<double, D, 1>;
  using Verts = std::array<int, D + 1>;
  using Facet = std::array<int, D>;

  explicit BowyerWatson(std::vector<Point> points) : points_(std::move(points)), n_real_(std::ssize(points_)) {}

  std::vector<std::vector<Index>> run() {
    add_super_simplex();
    for (int p = 0; p < n_real_; ++p) insert(p);

    std::vector<std::set<Index>> adj(static_cast<std::size_t>(n_real_));
    for (const Simplex& s : simplices_) {
      if (!s.alive) continue;
      for (int a = 0; a <= D; ++a)
        for (int b = a + 1; b <= D; ++b) {
          const int u = s.v[a], w = s.v[b];
          if (u >= n_real_ || w >= n_real_) continue;
          adj[u].insert(w);
          adj[w].insert(u);
        }
    }
    std::vector<std::vector<Index>> out(adj.size());
    for (std::size_t i = 0; i < adj.size(); ++i) out[i].assign(adj[i].begin(), adj[i].end());
    return out;
  }

 private:
  struct Simplex {
    Verts v;
    Point center;
    double radius2 = 0.0;
    bool alive = true;
  };

  void add_super_simplex() {
    // Input is normalized to the unit box; the super-simplex is far outside it.
    constexpr double R = 100.0;
    const Point c = Point::Constant(0.5);
    if constexpr (D == 2) {
      for (int k = 0; k < 3; ++k) {
        const double theta = M_PI / 2.0 + 2.0 * M_PI * k / 3.0;
        points_.push_back(c + R * Point(std::cos(theta), std::sin(theta)));
      }
    } else {
      points_.push_back(c + R * Point(1, 1, 1));
      points_.push_back(c + R * Point(1, -1, -1));
      points_.push_back(c + R * Point(-1, 1, -1));
      points_.push_back(c + R * Point(-1, -1, 1));
    }
    Verts v;
    for (int k = 0; k <= D; ++k) v[k] = n_real_ + k;
    make_simplex(v);
  }

  bool make_simplex(const Verts& v) {
    Eigen::Matrix<double, D, D> A;
    Point rhs;
    const Point& p0 = points_[v[0]];
    for (int i = 0; i < D; ++i) {
      const Point a = points_[v[i + 1]] - p0;
      A.row(i) = 2.0 * a.transpose();
      rhs[i] = a.squaredNorm();
    }
    Eigen::FullPivLU<Eigen::Matrix<double, D, D>> lu(A);
    if (!lu.isInvertible()) return false;
    const Point offset = lu.solve(rhs);
    simplices_.push_back({v, p0 + offset, offset.squaredNorm(), true});
    return true;
  }

  void insert(int p) {
    const Point& q = points_[p];
    std::map<Facet, int> facets;
    for (Simplex& s : simplices_) {
      if (!s.alive || (q - s.center).squaredNorm() >= s.radius2) continue;
      s.alive = false;
      for (int skip = 0; skip <= D; ++skip) {
        Facet f;
        for (int i = 0, j = 0; i <= D; ++i)
          if (i != skip) f[j++] = s.v[i];
        std::sort(f.begin(), f.end());
        ++facets[f];
      }
    }
    for (const auto& [facet, count] : facets) {
      if (count != 1) continue;
      Verts v;
      std::copy(facet.begin(), facet.end(), v.begin());
      v[D] = p;
      make_simplex(v);
    }
    if (simplices_.size() > 64 && ++inserts_since_compact_ > 32) {
      std::erase_if(simplices_, [](const Simplex& s) { return !s.alive; });
      inserts_since_compact_ = 0;
    }
  }

  std::vector<Point> points_;
  int n_real_;
  std::vector<Simplex> simplices_;
  int inserts_since_compact_ = 0;
};

template <int D>
std::vector<std::vector<Index>> triangulate(const Matrix& pts, double diameter) {
  const Vector lo = pts.rowwise().minCoeff();
  std::vector<typename BowyerWatson<D>::Point> normalized(static_cast<std::size_t>(pts.cols()));
  for (Index j = 0; j < pts.cols(); ++j) {
    typename BowyerWatson<D>::Point p = (pts.col(j) - lo) / diameter;
    for (int d = 0; d < D; ++d) p[d] += 1e-9 * hash_unit(static_cast<std::uint64_t>(j) * 8 + d);
    normalized[static_cast<std::size_t>(j)] = p;
  }
  return BowyerWatson<D>(std::move(normalized)).run();
}

}  // namespace

std::vector<std::vector<Index>> delaunay_adjacency(const Matrix& points) {
  const int k = static_cast<int>(points.rows());
  const Index n = points.cols();
  if (k != 2 && k != 3) throw Error(Errc::usage, "Delaunay tessellation supports reduced dimensions 2 and 3 only");
  const double diameter = (points.rowwise().maxCoeff() - points.rowwise().minCoeff()).norm();
  if (!(diameter > 0.0)) throw Error(Errc::numerical, "degenerate reduced cloud");

  if (n <= k + 1) {
    std::vector<std::vector<Index>> all(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        if (i != j) all[static_cast<std::size_t>(i)].push_back(j);
    return all;
  }
  return k == 2 ? triangulate<2>(points, diameter) : triangulate<3>(points, diameter);
}

}  // namespace kpod
