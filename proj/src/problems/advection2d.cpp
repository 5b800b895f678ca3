#include "kpod/problems/advection2d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "kpod/error.hpp"
#include "kpod/parallel.hpp"

namespace kpod::adv2d {

namespace {

// Area and gradients of the three P1 basis functions on triangle t.
struct ElementGeometry {
  double area;
  std::array<Velocity, 3> grad;
};

ElementGeometry element(const Mesh2D& mesh, Index t) {
  const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t)];
  const Point& p0 = mesh.nodes[static_cast<std::size_t>(tri[0])];
  const Point& p1 = mesh.nodes[static_cast<std::size_t>(tri[1])];
  const Point& p2 = mesh.nodes[static_cast<std::size_t>(tri[2])];
  const double det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
  ElementGeometry g;
  g.area = 0.5 * det;
  g.grad[0] = {(p1[1] - p2[1]) / det, (p2[0] - p1[0]) / det};
  g.grad[1] = {(p2[1] - p0[1]) / det, (p0[0] - p2[0]) / det};
  g.grad[2] = {(p0[1] - p1[1]) / det, (p1[0] - p0[0]) / det};
  return g;
}

double dot(const Velocity& a, const Velocity& b) { return a[0] * b[0] + a[1] * b[1]; }

BoundaryTrace make_trace(std::vector<std::pair<double, Index>> entries) {
  std::ranges::sort(entries);
  BoundaryTrace trace;
  for (const auto& [s, node] : entries) {
    trace.abscissa.push_back(s);
    trace.nodes.push_back(node);
  }
  return trace;
}

}  // namespace

ElementField potential_flow(const Mesh2D& mesh, FlowDirection direction) {
  const Index n = mesh.node_count();
  if (n < 3 || mesh.triangle_count() < 1) throw Error(Errc::dimension, "potential flow: empty mesh");
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(9 * mesh.triangle_count()));
  Vector load = Vector::Zero(n);

  // Coordinate and sign of the inflow side (flux +1) and outflow side (-1).
  const int axis = direction == FlowDirection::horizontal ? 0 : 1;
  const double inflow = direction == FlowDirection::horizontal ? -1.0 : 1.0;

  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const ElementGeometry g = element(mesh, t);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        if (tri[i] == 0 || tri[j] == 0) continue;
        trip.emplace_back(tri[i], tri[j], g.area * dot(g.grad[i], g.grad[j]));
      }
    for (int e = 0; e < 3; ++e) {
      const Index a = tri[e], b = tri[(e + 1) % 3];
      const Point& pa = mesh.nodes[static_cast<std::size_t>(a)];
      const Point& pb = mesh.nodes[static_cast<std::size_t>(b)];
      const double c = pa[axis];
      if (c != pb[axis] || std::abs(c) != 1.0) continue;
      const double flux = c == inflow ? 1.0 : -1.0;
      const double half = 0.5 * std::hypot(pa[0] - pb[0], pa[1] - pb[1]);
      load[a] += flux * half;
      load[b] += flux * half;
    }
  }
  trip.emplace_back(0, 0, 1.0);
  load[0] = 0.0;

  SparseMatrix S(n, n);
  S.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<SparseMatrix> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw Error(Errc::numerical, "potential flow: singular Laplace system");
  const Vector phi = ldlt.solve(load);
  if (ldlt.info() != Eigen::Success || !phi.allFinite())
    throw Error(Errc::numerical, "potential flow: Laplace solve failed (disconnected mesh?)");
  // A disconnected mesh leaves a floating component; catch it via the residual.
  if ((S * phi - load).norm() > 1e-8 * std::max(load.norm(), 1.0))
    throw Error(Errc::numerical, "potential flow: Laplace solve failed (disconnected mesh?)");

  ElementField v(static_cast<std::size_t>(mesh.triangle_count()));
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const ElementGeometry g = element(mesh, t);
    Velocity w{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      w[0] -= phi[tri[i]] * g.grad[i][0];
      w[1] -= phi[tri[i]] * g.grad[i][1];
    }
    v[static_cast<std::size_t>(t)] = w;
  }
  return v;
}

LinearSystem assemble_advection_diffusion(const Mesh2D& mesh, const ElementField& velocity, double diffusivity,
                                          const std::vector<Index>& dirichlet_nodes,
                                          const std::function<double(Index)>& dirichlet) {
  if (std::ssize(velocity) != mesh.triangle_count())
    throw Error(Errc::dimension, "assembly: one velocity per triangle expected");
  const Index n = mesh.node_count();
  std::vector<char> fixed(static_cast<std::size_t>(n), 0);
  Vector value = Vector::Zero(n);
  for (Index i : dirichlet_nodes) {
    fixed[static_cast<std::size_t>(i)] = 1;
    value[i] = dirichlet(i);
  }

  LinearSystem sys;
  sys.f = Vector::Zero(n);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(9 * mesh.triangle_count() + std::ssize(dirichlet_nodes)));
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    const Triangle& tri = mesh.triangles[static_cast<std::size_t>(t)];
    const ElementGeometry g = element(mesh, t);
    const Velocity& b = velocity[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i) {
      if (fixed[static_cast<std::size_t>(tri[i])]) continue;
      for (int j = 0; j < 3; ++j) {
        const double k = diffusivity * g.area * dot(g.grad[i], g.grad[j]) + g.area / 3.0 * dot(b, g.grad[j]);
        if (fixed[static_cast<std::size_t>(tri[j])])
          sys.f[tri[i]] -= k * value[tri[j]];
        else
          trip.emplace_back(tri[i], tri[j], k);
      }
    }
  }
  for (Index i : dirichlet_nodes) {
    trip.emplace_back(i, i, 1.0);
    sys.f[i] = value[i];
  }
  sys.K.resize(n, n);
  sys.K.setFromTriplets(trip.begin(), trip.end());
  return sys;
}

double Problem2D::source_value(double y, double source) const {
  const double sigma = 2.0 * mesh.h;
  const double d = (y - source) / sigma;
  return std::exp(-0.5 * d * d) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

ElementField Problem2D::velocity(double angle_deg) const {
  const double a = angle_deg * std::numbers::pi / 180.0;
  const double c = speed * std::cos(a), s = speed * std::sin(a);
  ElementField v(flow_x.size());
  for (std::size_t t = 0; t < v.size(); ++t)
    v[t] = {c * flow_x[t][0] + s * flow_y[t][0], c * flow_x[t][1] + s * flow_y[t][1]};
  return v;
}

Problem2D make_problem_2d(Mesh2D mesh) {
  mesh.validate();
  Problem2D p;
  p.flow_x = potential_flow(mesh, FlowDirection::horizontal);
  p.flow_y = potential_flow(mesh, FlowDirection::vertical);
  std::vector<std::pair<double, Index>> in, out;
  for (Index i = 0; i < mesh.node_count(); ++i) {
    const Point& x = mesh.nodes[static_cast<std::size_t>(i)];
    switch (mesh.markers[static_cast<std::size_t>(i)]) {
      case Marker::dirichlet:
        in.emplace_back(x[1], i);
        break;
      case Marker::bottom:
        out.emplace_back(x[0] + 1.0, i);
        break;
      case Marker::right:
        out.emplace_back(x[1] + 3.0, i);
        break;
      case Marker::circle:
        p.circle_nodes.push_back(i);
        break;
      default:
        break;
    }
  }
  if (in.size() < 2 || out.size() < 2) throw Error(Errc::dimension, "2D problem: mesh lacks inlet or outlet nodes");
  p.inlet = make_trace(std::move(in));
  p.outlet = make_trace(std::move(out));
  p.dirichlet_nodes = p.inlet.nodes;
  p.mesh = std::move(mesh);
  return p;
}

LinearSystem assemble_2d(const Problem2D& problem, const Params2D& params) {
  const auto& nodes = problem.mesh.nodes;
  return assemble_advection_diffusion(problem.mesh, problem.velocity(params.angle_deg), problem.diffusivity,
                                      problem.dirichlet_nodes, [&](Index i) {
                                        return problem.source_value(nodes[static_cast<std::size_t>(i)][1],
                                                                    params.source);
                                      });
}

LinearSystem assemble_2d_constant(const Problem2D& problem, const Params2D& params, double value) {
  return assemble_advection_diffusion(problem.mesh, problem.velocity(params.angle_deg), problem.diffusivity,
                                      problem.dirichlet_nodes, [value](Index) { return value; });
}

Vector solve_full(const LinearSystem& system) {
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(system.K);
  lu.factorize(system.K);
  if (lu.info() != Eigen::Success) throw Error(Errc::numerical, "full-order solve: factorization failed");
  Vector x = lu.solve(system.f);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw Error(Errc::numerical, "full-order solve failed");
  return x;
}

double residual_norm(const LinearSystem& system, const Vector& x) { return (system.f - system.K * x).norm(); }

std::string to_string(Regime r) {
  switch (r) {
    case Regime::below:
      return "below";
    case Regime::crossing:
      return "crossing";
    case Regime::above:
      return "above";
  }
  return "unknown";
}

Regime classify_regime(const Vector& u, const Problem2D& problem) {
  if (u.size() != problem.dim()) throw Error(Errc::dimension, "classify_regime: state size mismatch");
  for (Index i : problem.circle_nodes)
    if (u[i] > 0.1) return Regime::crossing;
  const Centroid c = centroid_or_fallback(problem.outlet.gather(u), problem.outlet.abscissa);
  return c.position > 3.0 ? Regime::above : Regime::below;
}

KernelSpec make_kernel_2d(const Problem2D& problem, double beta) {
  return make_centroid_2d_kernel(beta, problem.inlet, problem.outlet);
}

std::vector<Params2D> sample_params_2d(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto unit = [&] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Params2D> out(count);
  for (auto& p : out) {
    p.source = -0.8 + 1.6 * unit();
    p.angle_deg = 10.0 + 70.0 * unit();
  }
  return out;
}

SnapshotSet campaign_2d(const Problem2D& problem, std::size_t count, std::uint64_t seed, int jobs) {
  if (count < 3) throw Error(Errc::usage, "2D campaign needs at least 3 snapshots");
  const auto params = sample_params_2d(count, seed);
  SnapshotSet set;
  set.X.resize(problem.dim(), static_cast<Index>(count));
  set.params.resize(count);
  parallel_for(count, jobs, [&](std::size_t j) {
    set.X.col(static_cast<Index>(j)) = solve_full(assemble_2d(problem, params[j]));
    set.params[j] = {params[j].source, params[j].angle_deg};
  });
  return set;
}

}  // namespace kpod::adv2d
