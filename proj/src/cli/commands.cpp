#include "cli/commands.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "kpod/error.hpp"
#include "kpod/parallel.hpp"

namespace kpod::cli {

namespace fs = std::filesystem;

namespace {

std::string levels_label(int base) { return std::to_string(base) + "/" + std::to_string(base + 1); }

ModelBundle model_or_offline(const std::optional<fs::path>& path, OfflineConfig config) {
  if (path) {
    ModelBundle m = load_model(*path);
    if (problem_of(m) != config.problem)
      throw Error(Errc::usage, "model at " + path->string() + " was built for " + to_string(problem_of(m)));
    return m;
  }
  return run_offline(config);
}

// Steps at which 1D errors are reported: every 50 up to n, plus n itself.
std::vector<int> report_steps(int n) {
  std::vector<int> s;
  for (int k = 50; k <= n; k += 50) s.push_back(k);
  if (s.empty() || s.back() != n) s.push_back(n);
  return s;
}

void write_solution_1d(const fs::path& path, const adv1d::Grid1D& grid, const Vector& u) {
  Table t({"x[m]", "u[-]"});
  const auto x = grid.interior_nodes();
  for (Index i = 0; i < u.size(); ++i) t.add_row({x[static_cast<std::size_t>(i)], u[i]});
  std::ostringstream ss;
  t.write_csv(ss);
  write_text_file(path, ss.str());
}

void write_solution_2d(const fs::path& path, const adv2d::Mesh2D& mesh, const Vector& u) {
  Table t({"node[-]", "x[m]", "y[m]", "u[-]"});
  for (Index i = 0; i < u.size(); ++i) {
    const auto& p = mesh.nodes[static_cast<std::size_t>(i)];
    t.add_row({static_cast<long long>(i + 1), p[0], p[1], u[i]});
  }
  std::ostringstream ss;
  t.write_csv(ss);
  write_text_file(path, ss.str());
}

void online_1d(const OnlineArgs& a, const ModelBundle& m, std::ostream& out) {
  const adv1d::Grid1D grid = grid_from(m);
  const Run1D run = run_1d(m, a.strategy, a.velocity, a.steps, a.base_level);
  const auto& tr = run.trajectory;
  const bool path = a.strategy == Strategy::kpod || a.strategy == Strategy::qpod;

  Table trace({"step[-]", "time[s]", "levels[-]", "solves[-]", "mean_k_tilde[-]", "status[-]"});
  for (int n = 0; n < a.steps; ++n) {
    const auto i = static_cast<std::size_t>(n);
    if (path)
      trace.add_row({static_cast<long long>(n + 1), grid.dt * (n + 1), levels_label(a.base_level),
                     static_cast<long long>(tr.path_solves[i]), tr.path_mean_rank[i], to_string(tr.path_status[i])});
    else
      trace.add_row({static_cast<long long>(n + 1), grid.dt * (n + 1), std::string("-"), 1LL, std::nan(""),
                     std::string("direct")});
  }
  std::ostringstream ts;
  trace.write_csv(ts);
  write_text_file(a.trace, ts.str());
  write_solution_1d(a.solution, grid, tr.states.back());

  out << "problem adv1d\nstrategy " << to_string(a.strategy) << "\nvelocity " << format_number(a.velocity)
      << "\nsteps " << a.steps << "\n";
  if (path)
    out << "levels " << levels_label(a.base_level) << "\nmean_path_solves " << format_number(run.mean_steps(a.steps))
        << "\nmean_k_tilde " << format_number(run.mean_rank(a.steps)) << "\n";
  if (a.reference_full) {
    const Run1D ref = run_1d(m, Strategy::full, a.velocity, a.steps, a.base_level);
    Table err({"time[s]", "relative_error[-]"});
    for (int n : report_steps(a.steps))
      err.add_row({grid.dt * n, relative_error(tr.states[static_cast<std::size_t>(n)],
                                               ref.trajectory.states[static_cast<std::size_t>(n)])});
    err.write_csv(out);
  }
}

void online_2d(const OnlineArgs& a, const ModelBundle& m, std::ostream& out) {
  const adv2d::Problem2D problem = problem_2d_from(m);
  const adv2d::Params2D params{a.source, a.angle};
  const adv2d::LinearSystem sys = adv2d::assemble_2d(problem, params);
  const Query2D q = run_2d(m, problem, sys, a.strategy, params, a.base_level, nullptr, a.qpod_columns);

  std::ostringstream ts;
  if (q.trace) {
    write_trace_csv(ts, *q.trace);
  } else {
    ts << "step[-],cell[-],level[-],k_tilde[-],residual[l2]\n";
  }
  write_text_file(a.trace, ts.str());
  write_solution_2d(a.solution, problem.mesh, q.x);

  out << "problem adv2d\nstrategy " << to_string(a.strategy) << "\nsource " << format_number(a.source) << "\nangle "
      << format_number(a.angle) << "\nregime " << to_string(adv2d::classify_regime(q.x, problem)) << "\n";
  if (q.trace)
    out << "levels " << levels_label(a.base_level) << "\npath_solves " << q.trace->solves() << "\npath_status "
        << to_string(q.trace->status) << "\nmean_k_tilde " << format_number(q.trace->mean_rank()) << "\n";
  out << "residual " << format_number(adv2d::residual_norm(sys, q.x)) << "\n";
  if (a.reference_full) {
    const Vector ref = adv2d::solve_full(sys);
    out << "relative_error " << format_number(relative_error(q.x, ref)) << "\n";
  }
}

struct BenchOutput {
  Table table;
  std::vector<std::pair<std::string, Table>> profiles;
};

BenchOutput bench_1d_pod(const ModelBundle& m) {
  const auto pod = model_pod(m);
  const Run1D full = run_1d(m, Strategy::full, 1.5, 200, 1);
  const Run1D run = run_1d(m, Strategy::pod, 1.5, 200, 1, &pod);
  const adv1d::Grid1D grid = grid_from(m);
  BenchOutput o{Table({"time[s]", "pod_error[-]", "pod_rank[-]"}), {}};
  for (int n : kReportSteps1D)
    o.table.add_row({grid.dt * n,
                     relative_error(run.trajectory.states[static_cast<std::size_t>(n)],
                                    full.trajectory.states[static_cast<std::size_t>(n)]),
                     static_cast<long long>(pod.rank())});
  Table profile({"x[m]", "u_full[-]", "u_pod[-]"});
  const auto x = grid.interior_nodes();
  for (Index i = 0; i < grid.unknowns(); ++i)
    profile.add_row({x[static_cast<std::size_t>(i)], full.trajectory.states.back()[i], run.trajectory.states.back()[i]});
  o.profiles.emplace_back("profile_t1", std::move(profile));
  return o;
}

BenchOutput bench_1d_kpod(const ModelBundle& m, const std::vector<int>& levels, int jobs, bool by_level) {
  const adv1d::Grid1D grid = grid_from(m);
  const Run1D full = run_1d(m, Strategy::full, 1.5, 200, 1);
  std::vector<Run1D> runs(levels.size());
  parallel_for(levels.size(), jobs,
               [&](std::size_t i) { runs[i] = run_1d(m, Strategy::kpod, 1.5, 200, levels[i]); });
  const auto err = [&](const Run1D& r, int n) {
    return relative_error(r.trajectory.states[static_cast<std::size_t>(n)],
                          full.trajectory.states[static_cast<std::size_t>(n)]);
  };

  BenchOutput o{by_level ? Table({"levels[-]", "kpod_error_t1[-]", "mean_steps[-]", "mean_k_tilde[-]"})
                         : Table({"time[s]", "kpod_error[-]", "mean_steps[-]", "mean_k_tilde[-]"}),
                {}};
  if (by_level) {
    for (const auto& r : runs)
      o.table.add_row({levels_label(r.base_level), err(r, 200), r.mean_steps(200), r.mean_rank(200)});
  } else {
    for (int n : kReportSteps1D) o.table.add_row({grid.dt * n, err(runs[0], n), runs[0].mean_steps(n), runs[0].mean_rank(n)});
  }
  std::vector<std::string> cols = {"x[m]", "u_full[-]"};
  for (const auto& r : runs) cols.push_back("u_kpod_" + std::to_string(r.base_level) + "_" + std::to_string(r.base_level + 1) + "[-]");
  Table profile(cols);
  const auto x = grid.interior_nodes();
  for (Index i = 0; i < grid.unknowns(); ++i) {
    std::vector<Table::Cell> row = {x[static_cast<std::size_t>(i)], full.trajectory.states.back()[i]};
    for (const auto& r : runs) row.emplace_back(r.trajectory.states.back()[i]);
    profile.add_row(std::move(row));
  }
  o.profiles.emplace_back("profile_t1", std::move(profile));
  return o;
}

BenchOutput bench_2d(const ModelBundle& m, int base_level, int jobs, Index qpod_columns) {
  const adv2d::Problem2D problem = problem_2d_from(m);
  const ReducedBasis pod = model_pod(m);
  struct Row {
    Vector full, pod, kpod, qpod;
    std::string qpod_status = "ok";
    PathTrace trace;
  };
  std::vector<Row> rows(kQueries2D.size());
  parallel_for(kQueries2D.size(), jobs, [&](std::size_t i) {
    const auto& params = kQueries2D[i];
    const adv2d::LinearSystem sys = adv2d::assemble_2d(problem, params);
    Row& r = rows[i];
    r.full = adv2d::solve_full(sys);
    r.pod = run_2d(m, problem, sys, Strategy::pod, params, base_level, &pod).x;
    Query2D k = run_2d(m, problem, sys, Strategy::kpod, params, base_level, &pod);
    r.kpod = std::move(k.x);
    r.trace = std::move(*k.trace);
    try {
      r.qpod = run_2d(m, problem, sys, Strategy::qpod, params, base_level, &pod, qpod_columns).x;
    } catch (const Error& e) {
      if (e.code() != Errc::usage) throw;
      r.qpod_status = "memory_guard";
    }
  });

  BenchOutput o{Table({"source[m]", "angle[deg]", "regime[-]", "pod_error[-]", "kpod_error[-]", "qpod_error[-]",
                       "qpod_status[-]", "kpod_solves[-]", "kpod_status[-]", "kpod_mean_k_tilde[-]"}),
                {}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Row& r = rows[i];
    const auto& p = kQueries2D[i];
    o.table.add_row({p.source, p.angle_deg, to_string(adv2d::classify_regime(r.full, problem)),
                     relative_error(r.pod, r.full), relative_error(r.kpod, r.full),
                     r.qpod.size() ? relative_error(r.qpod, r.full) : std::nan(""), r.qpod_status,
                     static_cast<long long>(r.trace.solves()), std::string(to_string(r.trace.status)),
                     r.trace.mean_rank()});
    Table profile({"s[m]", "u_full[-]", "u_pod[-]", "u_kpod[-]", "u_qpod[-]"});
    for (std::size_t j = 0; j < problem.outlet.nodes.size(); ++j) {
      const Index node = problem.outlet.nodes[j];
      profile.add_row({problem.outlet.abscissa[j], r.full[node], r.pod[node], r.kpod[node],
                       r.qpod.size() ? r.qpod[node] : std::nan("")});
    }
    o.profiles.emplace_back("profile_q" + std::to_string(i + 1) + "_outlet", std::move(profile));
  }
  return o;
}

}  // namespace

void cmd_offline(const OfflineArgs& a, std::ostream& out) {
  const ModelBundle m = run_offline(a.config);
  save_model(m, a.out);
  const Spectrum& s = m.kpca.spectrum;
  out << "problem " << to_string(a.config.problem) << "\nsnapshots " << m.snapshots.size() << "\nn_d "
      << m.snapshots.dim() << "\nk " << m.kpca.rank() << "\n";
  Table t({"index[-]", "eigenvalue[-]", "cumulative_fraction[-]"});
  const int rows = std::min<int>(a.spectrum_rows, static_cast<int>(s.values.size()));
  for (int i = 0; i < rows; ++i)
    t.add_row({static_cast<long long>(i + 1), s.values[static_cast<std::size_t>(i)], s.cumulative_fraction(i + 1)});
  t.write_csv(out);
}

void cmd_online(const OnlineArgs& a, std::ostream& out) {
  if (a.steps < 1) throw Error(Errc::usage, "--steps must be positive");
  const ModelBundle m = load_model(a.model);
  if (problem_of(m) == ProblemId::adv1d)
    online_1d(a, m, out);
  else
    online_2d(a, m, out);
}

void cmd_bench(const BenchArgs& a, std::ostream& out) {
  OfflineConfig c;
  c.jobs = a.jobs;
  BenchOutput result{Table(std::vector<std::string>{}), {}};
  if (a.table == "table-1d") {
    result = bench_1d_pod(model_or_offline(a.model, c));
  } else if (a.table == "table-1d-kpod") {
    result = bench_1d_kpod(model_or_offline(a.model, c), {a.base_level}, a.jobs, false);
  } else if (a.table == "table-1d-levels") {
    result = bench_1d_kpod(model_or_offline(a.model, c), {1, 2, 3}, a.jobs, true);
  } else if (a.table == "table-2d") {
    c.problem = ProblemId::adv2d;
    c.ns = a.ns;
    c.seed = a.seed;
    c.h = a.h;
    result = bench_2d(model_or_offline(a.model, c), a.base_level, a.jobs, a.qpod_columns);
  } else {
    throw Error(Errc::usage, "unknown table '" + a.table +
                                 "' (expected table-1d, table-1d-kpod, table-1d-levels or table-2d)");
  }
  result.table.write(out, a.format);
  if (a.out) {
    std::ostringstream ss;
    result.table.write(ss, a.format);
    write_text_file(*a.out / (a.table + (a.format == Format::csv ? ".csv" : ".json")), ss.str());
    for (const auto& [name, table] : result.profiles) {
      std::ostringstream ps;
      table.write_csv(ps);
      write_text_file(*a.out / (a.table + "_" + name + ".csv"), ps.str());
    }
  }
}

void cmd_mesh(const MeshArgs& a, std::ostream& out) {
  adv2d::Mesh2D mesh;
  if (a.action == "generate") {
    if (!(a.h > 0.0 && a.h <= 0.25)) throw Error(Errc::usage, "--h must lie in (0, 0.25]");
    if (!(a.hole_radius >= 0.0 && a.hole_radius < 0.9)) throw Error(Errc::usage, "--hole must lie in [0, 0.9)");
    mesh = adv2d::build_mesh_2d(a.h, a.hole_radius);
    adv2d::save_mesh(a.file, mesh);
  } else if (a.action == "inspect") {
    mesh = adv2d::load_mesh(a.file);
    mesh.validate();
  } else {
    throw Error(Errc::usage, "unknown mesh action '" + a.action + "' (expected generate or inspect)");
  }
  double amin = INFINITY, amax = 0.0;
  for (Index t = 0; t < mesh.triangle_count(); ++t) {
    amin = std::min(amin, mesh.area(t));
    amax = std::max(amax, mesh.area(t));
  }
  std::map<int, long long> counts;
  for (auto mk : mesh.markers) ++counts[static_cast<int>(mk)];
  out << "nodes " << mesh.node_count() << "\ntriangles " << mesh.triangle_count() << "\nh " << format_number(mesh.h)
      << "\nhole_radius " << format_number(mesh.hole_radius) << "\nmin_area " << format_number(amin) << "\nmax_area "
      << format_number(amax) << "\n";
  Table t({"marker[-]", "nodes[-]"});
  for (const auto& [mk, n] : counts) t.add_row({static_cast<long long>(mk), n});
  t.write_csv(out);
}

}  // namespace kpod::cli
