#include "kpod/workflow.hpp"

#include "kpod/error.hpp"
#include "kpod/geometry.hpp"

namespace kpod {

ProblemId parse_problem(const std::string& s) {
  if (s == "adv1d") return ProblemId::adv1d;
  if (s == "adv2d") return ProblemId::adv2d;
  throw Error(Errc::usage, "unknown problem '" + s + "' (expected adv1d or adv2d)");
}

std::string to_string(ProblemId p) { return p == ProblemId::adv1d ? "adv1d" : "adv2d"; }

Strategy parse_strategy(const std::string& s) {
  if (s == "kpod") return Strategy::kpod;
  if (s == "pod") return Strategy::pod;
  if (s == "qpod") return Strategy::qpod;
  if (s == "full") return Strategy::full;
  throw Error(Errc::usage, "unknown strategy '" + s + "' (expected kpod, pod, qpod or full)");
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kpod: return "kpod";
    case Strategy::pod: return "pod";
    case Strategy::qpod: return "qpod";
    case Strategy::full: return "full";
  }
  return "unknown";
}

int parse_levels(const std::string& s) {
  const auto slash = s.find('/');
  int a = 0, b = 0;
  try {
    if (slash == std::string::npos) throw std::invalid_argument(s);
    std::size_t pa = 0, pb = 0;
    a = std::stoi(s.substr(0, slash), &pa);
    b = std::stoi(s.substr(slash + 1), &pb);
    if (pa != slash || pb != s.size() - slash - 1) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw Error(Errc::usage, "levels must look like L/L+1, got '" + s + "'");
  }
  if (a < 1 || b != a + 1) throw Error(Errc::usage, "levels must be L/L+1 with L >= 1, got '" + s + "'");
  return a;
}

namespace {

KernelSpec kernel_for(const OfflineConfig& c, const adv2d::Problem2D* p2d, const adv1d::Grid1D& grid) {
  std::string name = c.kernel;
  if (name.empty()) name = c.problem == ProblemId::adv1d ? "centroid1d" : "centroid2d";
  const double beta = c.beta.value_or(c.problem == ProblemId::adv1d ? 1e-4 : 1e-3);
  if (name == "centroid1d") {
    if (c.problem != ProblemId::adv1d) throw Error(Errc::usage, "kernel centroid1d needs problem adv1d");
    return make_centroid_1d_kernel(beta, grid.begin, grid.end);
  }
  if (name == "centroid2d") {
    if (!p2d) throw Error(Errc::usage, "kernel centroid2d needs problem adv2d");
    return adv2d::make_kernel_2d(*p2d, beta);
  }
  if (name == "gaussian") return make_gaussian_kernel(beta);
  throw Error(Errc::usage, "unknown kernel '" + name + "' (expected centroid1d, centroid2d or gaussian)");
}

}  // namespace

ModelBundle run_offline(const OfflineConfig& c) {
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw Error(Errc::usage, "epsilon must lie in (0, 1)");
  ModelBundle m;
  m.epsilon = c.epsilon;
  const adv1d::Grid1D grid;
  std::optional<adv2d::Problem2D> p2d;
  if (c.problem == ProblemId::adv1d) {
    m.snapshots = adv1d::campaign_1d(grid, c.jobs);
    m.param_names = {"velocity[m/s]", "time[s]"};
    m.problem = {{"id", "adv1d"},
                 {"domain", {grid.begin, grid.end}},
                 {"intervals", grid.n_intervals},
                 {"dt", grid.dt},
                 {"steps", grid.n_steps},
                 {"diffusivity", grid.diffusivity}};
  } else {
    if (c.ns < 3) throw Error(Errc::usage, "--ns must be at least 3");
    if (!(c.h > 0.0 && c.h <= 0.25)) throw Error(Errc::usage, "--h must lie in (0, 0.25]");
    p2d = adv2d::make_problem_2d(adv2d::build_mesh_2d(c.h));
    m.snapshots = adv2d::campaign_2d(*p2d, static_cast<std::size_t>(c.ns), c.seed, c.jobs);
    m.param_names = {"source[m]", "angle[deg]"};
    m.problem = {{"id", "adv2d"},
                 {"h", c.h},
                 {"hole_radius", p2d->mesh.hole_radius},
                 {"seed", c.seed},
                 {"n_S", c.ns},
                 {"diffusivity", p2d->diffusivity},
                 {"speed", p2d->speed}};
    m.mesh = p2d->mesh;
  }

  KpcaOptions o;
  o.centering = c.centering;
  o.tolerance = c.kpca_tolerance.value_or(c.problem == ProblemId::adv1d ? 1e-2 : 1e-3);
  o.rank = c.rank;
  if (!o.rank && !c.kpca_tolerance && c.problem == ProblemId::adv2d) o.rank = 2;
  m.kpca = kpca_fit(m.snapshots, kernel_for(c, p2d ? &*p2d : nullptr, grid), o);
  m.geometry = build_geometry(m.kpca.Z);
  return m;
}

ProblemId problem_of(const ModelBundle& m) {
  try {
    return parse_problem(m.problem.at("id").get<std::string>());
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::parse, "manifest: problem descriptor lacks an id");
  }
}

adv1d::Grid1D grid_from(const ModelBundle& m) {
  if (problem_of(m) != ProblemId::adv1d) throw Error(Errc::usage, "model was not built for adv1d");
  adv1d::Grid1D g;
  try {
    const auto& p = m.problem;
    const auto d = p.at("domain").get<std::vector<double>>();
    g.begin = d.at(0);
    g.end = d.at(1);
    g.n_intervals = p.at("intervals").get<int>();
    g.dt = p.at("dt").get<double>();
    g.n_steps = p.at("steps").get<int>();
    g.diffusivity = p.at("diffusivity").get<double>();
  } catch (const std::exception& e) {
    throw Error(Errc::parse, std::string("manifest: bad adv1d descriptor: ") + e.what());
  }
  if (g.unknowns() != m.snapshots.dim()) throw Error(Errc::dimension, "adv1d grid size differs from n_d");
  return g;
}

adv2d::Problem2D problem_2d_from(const ModelBundle& m) {
  if (problem_of(m) != ProblemId::adv2d) throw Error(Errc::usage, "model was not built for adv2d");
  if (!m.mesh) throw Error(Errc::io, "adv2d model has no mesh.txt");
  adv2d::Problem2D p = adv2d::make_problem_2d(*m.mesh);
  try {
    p.diffusivity = m.problem.at("diffusivity").get<double>();
    p.speed = m.problem.at("speed").get<double>();
    p.mesh.h = m.problem.at("h").get<double>();
  } catch (const std::exception& e) {
    throw Error(Errc::parse, std::string("manifest: bad adv2d descriptor: ") + e.what());
  }
  return p;
}

OnlineContext make_context(const ModelBundle& m, Strategy strategy, Index max_basis_columns) {
  OnlineContext ctx;
  ctx.snapshots = &m.snapshots;
  ctx.kpca = &m.kpca;
  ctx.geometry = &m.geometry;
  ctx.tolerance = m.epsilon;
  ctx.quadratic = true;
  if (strategy == Strategy::qpod) {
    ctx.patch_mode = PatchMode::all_snapshots;
    ctx.max_basis_columns = max_basis_columns;
  }
  return ctx;
}

ReducedBasis model_pod(const ModelBundle& m) { return centered_pod(m.snapshots, m.epsilon); }

double Run1D::mean_steps(int n) const {
  const auto& s = trajectory.path_solves;
  if (n < 1 || static_cast<std::size_t>(n) > s.size()) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += s[static_cast<std::size_t>(i)];
  return sum / n;
}

double Run1D::mean_rank(int n) const {
  const auto& s = trajectory.path_mean_rank;
  if (n < 1 || static_cast<std::size_t>(n) > s.size()) return 0.0;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += s[static_cast<std::size_t>(i)];
  return sum / n;
}

Run1D run_1d(const ModelBundle& m, Strategy strategy, double velocity, int n_steps, int base_level,
             const ReducedBasis* pod) {
  const adv1d::Grid1D grid = grid_from(m);
  if (n_steps < 1) throw Error(Errc::usage, "number of time steps must be positive");
  Run1D r;
  r.strategy = strategy;
  r.base_level = base_level;
  switch (strategy) {
    case Strategy::full:
      r.trajectory = adv1d::integrate_full(velocity, grid, n_steps);
      break;
    case Strategy::pod: {
      const ReducedBasis basis = pod ? *pod : model_pod(m);
      r.trajectory = adv1d::integrate_pod(velocity, grid, n_steps, basis);
      break;
    }
    case Strategy::kpod:
    case Strategy::qpod:
      r.trajectory = adv1d::integrate_kpod(velocity, grid, n_steps, make_context(m, strategy), base_level);
      break;
  }
  return r;
}

Query2D run_2d(const ModelBundle& m, const adv2d::Problem2D& problem, const adv2d::LinearSystem& sys,
               Strategy strategy, const adv2d::Params2D& params, int base_level, const ReducedBasis* pod,
               Index max_basis_columns) {
  if (sys.K.rows() != problem.dim() || problem.dim() != m.snapshots.dim())
    throw Error(Errc::dimension, "2D query: system size differs from the model");
  Query2D q;
  q.params = params;
  q.strategy = strategy;
  if (strategy == Strategy::full) {
    q.x = adv2d::solve_full(sys);
    return q;
  }
  std::optional<ReducedBasis> own;
  if (!pod) pod = &own.emplace(model_pod(m));
  if (strategy == Strategy::pod) {
    q.x = rb_solve_galerkin(sys.K, sys.f, *pod);
    return q;
  }
  GuessContext guess;
  guess.K = &sys.K;
  guess.f = &sys.f;
  guess.pod_basis = pod;
  const Vector z0 = init_guess(GuessMode::from_pod, guess, m.kpca);
  PathResult r = optimal_path(z0, base_level, sys.K, sys.f, make_context(m, strategy, max_basis_columns));
  q.x = std::move(r.x);
  q.trace = std::move(r.trace);
  return q;
}

}  // namespace kpod
