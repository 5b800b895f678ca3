#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "kpod/error.hpp"
#include "kpod/problems/advection2d.hpp"

using namespace kpod;
using namespace kpod::adv2d;

namespace {

const Problem2D& reference_problem() {
  static const Problem2D p = make_problem_2d(build_mesh_2d(0.02));
  return p;
}

// Quarter turn clockwise: the left side maps onto the top side.
Mesh2D rotated(const Mesh2D& m) {
  Mesh2D r = m;
  for (auto& p : r.nodes) p = {p[1], -p[0]};
  return r;
}

std::vector<Index> boundary_nodes(const Mesh2D& m) {
  std::vector<Index> out;
  for (Index i = 0; i < m.node_count(); ++i)
    if (m.markers[static_cast<std::size_t>(i)] != Marker::interior) out.push_back(i);
  return out;
}

}  // namespace

TEST_SUITE("advection2d") {

TEST_CASE("potential flow on the plain square is uniform") {
  const Mesh2D m = build_mesh_2d(0.1, 0.0);
  const ElementField vx = potential_flow(m, FlowDirection::horizontal);
  const ElementField vy = potential_flow(m, FlowDirection::vertical);
  for (std::size_t t = 0; t < vx.size(); ++t) {
    CHECK(std::abs(vx[t][0] - 1.0) <= 1e-8);
    CHECK(std::abs(vx[t][1]) <= 1e-8);
    CHECK(std::abs(vy[t][0]) <= 1e-8);
    CHECK(std::abs(vy[t][1] + 1.0) <= 1e-8);
  }
}

TEST_CASE("potential flow around the island carries the inlet flux") {
  // Strip average of v_x over x in [0.5, 0.9], whose edges are grid lines at h = 0.05.
  const Mesh2D m = build_mesh_2d(0.05);
  const ElementField v = potential_flow(m, FlowDirection::horizontal);
  double flux = 0.0;
  for (Index t = 0; t < m.triangle_count(); ++t) {
    const auto& tri = m.triangles[static_cast<std::size_t>(t)];
    double cx = 0.0;
    for (Index i : tri) cx += m.nodes[static_cast<std::size_t>(i)][0] / 3.0;
    if (cx > 0.5 && cx < 0.9) flux += m.area(t) * v[static_cast<std::size_t>(t)][0];
  }
  flux /= 0.4;
  MESSAGE("mean flux across cuts: " << flux);
  CHECK(flux == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("vertical flow is the horizontal flow of the rotated mesh") {
  const Mesh2D m = build_mesh_2d(0.1);
  const ElementField h = potential_flow(m, FlowDirection::horizontal);
  const ElementField v = potential_flow(rotated(m), FlowDirection::vertical);
  double worst = 0.0;
  for (std::size_t t = 0; t < h.size(); ++t) {
    worst = std::max(worst, std::abs(v[t][0] - h[t][1]));
    worst = std::max(worst, std::abs(v[t][1] + h[t][0]));
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("disconnected mesh is rejected") {
  Mesh2D m;
  m.nodes = {{-1, -1}, {0, -1}, {-1, 0}, {0.5, 0.5}, {1, 0.5}, {0.5, 1}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  m.markers.assign(6, Marker::interior);
  CHECK_THROWS_AS(potential_flow(m, FlowDirection::horizontal), Error);
}

TEST_CASE("constant Dirichlet data gives a constant solution") {
  const Problem2D p = make_problem_2d(build_mesh_2d(0.05));
  for (const Params2D q : {Params2D{0.0, 30.0}, {0.4, 70.0}}) {
    const LinearSystem s = assemble_2d_constant(p, q, 0.37);
    const Vector u = solve_full(s);
    CHECK((u.array() - 0.37).abs().maxCoeff() <= 1e-9);
  }
}

TEST_CASE("linear Dirichlet data on the plain square is reproduced") {
  const Mesh2D m = build_mesh_2d(0.1, 0.0);
  const ElementField still(static_cast<std::size_t>(m.triangle_count()), Velocity{0.0, 0.0});
  const auto linear = [&](Index i) {
    const Point& x = m.nodes[static_cast<std::size_t>(i)];
    return 0.3 + 1.2 * x[0] - 0.7 * x[1];
  };
  const LinearSystem s = assemble_advection_diffusion(m, still, 1e-2, boundary_nodes(m), linear);
  const Vector u = solve_full(s);
  for (Index i = 0; i < m.node_count(); ++i) CHECK(std::abs(u[i] - linear(i)) <= 1e-9);
}

TEST_CASE("full solves satisfy the system") {
  const Problem2D& p = reference_problem();
  const LinearSystem s = assemble_2d(p, {0.5, 30.0});
  const Vector u = solve_full(s);
  CHECK(residual_norm(s, u) <= 1e-10 * s.f.norm());
  CHECK(u.size() == p.dim());
  for (Index i : p.dirichlet_nodes) CHECK(u[i] == s.f[i]);
}

TEST_CASE("inlet data") {
  const Problem2D& p = reference_problem();
  const double sigma = 2 * p.mesh.h;
  CHECK(p.source_value(0.2, 0.2) == doctest::Approx(1.0 / (sigma * std::sqrt(2 * std::numbers::pi))));
  CHECK(p.source_value(0.2 + sigma, 0.2) == doctest::Approx(std::exp(-0.5) / (sigma * std::sqrt(2 * std::numbers::pi))));
  CHECK(p.inlet.abscissa.front() == -1.0);
  CHECK(p.inlet.abscissa.back() == 1.0);
  CHECK(p.outlet.abscissa.front() > 0.0);  // the corner belongs to the inlet
  CHECK(p.outlet.abscissa.front() <= p.mesh.h + 1e-12);
  CHECK(p.outlet.abscissa.back() == 4.0);
  CHECK(std::is_sorted(p.outlet.abscissa.begin(), p.outlet.abscissa.end()));
}

TEST_CASE("flow regimes") {
  const Problem2D& p = reference_problem();
  const auto regime = [&](double source, double angle) { return classify_regime(solve_full(assemble_2d(p, {source, angle})), p); };
  CHECK(regime(0.7, 10.0) == Regime::above);
  CHECK(regime(0.7, 35.0) == Regime::crossing);
  CHECK(regime(0.0, 10.0) == Regime::crossing);
  CHECK(regime(0.0, 35.0) == Regime::below);
  CHECK(classify_regime(Vector::Zero(p.dim()), p) == Regime::below);
  CHECK_THROWS_AS(classify_regime(Vector::Zero(3), p), Error);
}

TEST_CASE("parameter sampling") {
  const auto a = sample_params_2d(60, kDefaultSeed2D);
  const auto b = sample_params_2d(60, kDefaultSeed2D);
  const auto c = sample_params_2d(60, kDefaultSeed2D + 1);
  REQUIRE(a.size() == 60);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    same = same && a[i].source == b[i].source && a[i].angle_deg == b[i].angle_deg;
    differ = differ || a[i].source != c[i].source;
    CHECK(a[i].source >= -0.8);
    CHECK(a[i].source <= 0.8);
    CHECK(a[i].angle_deg >= 10.0);
    CHECK(a[i].angle_deg <= 80.0);
  }
  CHECK(same);
  CHECK(differ);
  // The first draws are fixed by mt19937_64 and the 53-bit mapping.
  std::mt19937_64 rng(kDefaultSeed2D);
  const double u0 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  CHECK(a[0].source == -0.8 + 1.6 * u0);
}

TEST_CASE("campaign") {
  const Problem2D p = make_problem_2d(build_mesh_2d(0.1));
  const SnapshotSet X = campaign_2d(p, 12, kDefaultSeed2D);
  CHECK(X.size() == 12);
  CHECK(X.dim() == p.dim());
  const auto params = sample_params_2d(12, kDefaultSeed2D);
  for (std::size_t j = 0; j < params.size(); ++j) {
    CHECK(X.params[j] == std::vector<double>{params[j].source, params[j].angle_deg});
    const Vector u = solve_full(assemble_2d(p, params[j]));
    CHECK(X.X.col(static_cast<Index>(j)) == u);
  }
  const SnapshotSet Xp = campaign_2d(p, 12, kDefaultSeed2D, 3);
  CHECK(Xp.X == X.X);
  CHECK_THROWS_AS(campaign_2d(p, 2, kDefaultSeed2D), Error);

  const SnapshotSet X60 = campaign_2d(p, 60, kDefaultSeed2D, 4);
  int counts[3] = {0, 0, 0};
  for (Index j = 0; j < X60.size(); ++j) ++counts[static_cast<int>(classify_regime(X60.X.col(j), p))];
  MESSAGE("regimes of 60 samples at h = 0.1 (below/crossing/above): " << counts[0] << "/" << counts[1] << "/" << counts[2]);
  CHECK(X60.size() == 60);
}

}  // TEST_SUITE
