// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "kpod/error.hpp"
#include "kpod/geometry.hpp"
#include "kpod/model_store.hpp"
#include "kpod/online.hpp"
#include "kpod/workflow.hpp"
#include "test_support.hpp"

using namespace kpod;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(const std::string& id, bool ok, const std::string& what, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << id << " " << what << " | " << detail << std::endl;
  if (!ok) ++failures;
}

// Runs a criterion body; an exception counts as a failure of that criterion.
void criterion(const std::string& id, const std::string& what, const std::function<std::pair<bool, std::string>()>& body) {
  try {
    const auto [ok, detail] = body();
    report(id, ok, what, detail);
  } catch (const std::exception& e) {
    report(id, false, what, std::string("exception: ") + e.what());
  }
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

bool within_factor(double value, double target, double factor) {
  return value >= target / factor && value <= target * factor;
}

int jobs() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

struct Shared1D {
  ModelBundle model;
  ReducedBasis pod;
  Run1D full;
  double offline_seconds = 0.0;
};

Shared1D& shared_1d() {
  static Shared1D s = [] {
    Shared1D o;
    const auto t0 = Clock::now();
    OfflineConfig c;
    c.problem = ProblemId::adv1d;
    c.jobs = jobs();
    o.model = run_offline(c);
    o.offline_seconds = seconds_since(t0);
    o.pod = model_pod(o.model);
    o.full = run_1d(o.model, Strategy::full, 1.5, 200, 1);
    return o;
  }();
  return s;
}

double error_at(const Run1D& run, const Run1D& ref, int n) {
  const auto i = static_cast<std::size_t>(n);
  return relative_error(run.trajectory.states[i], ref.trajectory.states[i]);
}

// Snapshot set of a 2D toy problem on a coarse mesh.
struct Toy2D {
  adv2d::Problem2D problem = adv2d::make_problem_2d(adv2d::build_mesh_2d(0.1));
  ModelBundle model;
  Toy2D() {
    OfflineConfig c;
    c.problem = ProblemId::adv2d;
    c.ns = 20;
    c.h = 0.1;
    c.jobs = jobs();
    model = run_offline(c);
  }
};

const Toy2D& toy_2d() {
  static const Toy2D t;
  return t;
}

}  // namespace

int main() {
  std::cout << "kPOD acceptance run" << std::endl;

  criterion("1", "1D POD relative errors within x1.5 of 1.79e-1/1.91e-1/1.93e-1/1.93e-1, runtime < 5 min", [] {
    const auto t0 = Clock::now();
    auto& s = shared_1d();
    const Run1D pod = run_1d(s.model, Strategy::pod, 1.5, 200, 1, &s.pod);
    const double elapsed = seconds_since(t0);
    const double target[4] = {1.79e-1, 1.91e-1, 1.93e-1, 1.93e-1};
    bool ok = elapsed < 300.0;
    std::ostringstream d;
    for (int i = 0; i < 4; ++i) {
      const double e = error_at(pod, s.full, kReportSteps1D[static_cast<std::size_t>(i)]);
      ok = ok && within_factor(e, target[i], 1.5);
      d << "t=" << 0.25 * (i + 1) << ": " << sci(e) << "  ";
    }
    d << "runtime " << elapsed << " s";
    return std::pair{ok, d.str()};
  });

  criterion("2", "1D kPOD 1/2 errors within x3 of 3.31e-4/3.09e-4/3.08e-4/3.05e-4, mean steps in [2,5], mean k~ in [5,10], runtime < 10 min", [] {
    auto& s = shared_1d();
    const auto t0 = Clock::now();
    const Run1D run = run_1d(s.model, Strategy::kpod, 1.5, 200, 1);
    const double elapsed = seconds_since(t0) + s.offline_seconds;
    const double target[4] = {3.31e-4, 3.09e-4, 3.08e-4, 3.05e-4};
    bool ok = elapsed < 600.0;
    std::ostringstream d;
    for (int i = 0; i < 4; ++i) {
      const int n = kReportSteps1D[static_cast<std::size_t>(i)];
      const double e = error_at(run, s.full, n);
      const double steps = run.mean_steps(n), rank = run.mean_rank(n);
      ok = ok && within_factor(e, target[i], 3.0) && steps >= 2.0 && steps <= 5.0 && rank >= 5.0 && rank <= 10.0;
      d << "t=" << 0.25 * (i + 1) << ": " << sci(e) << " steps " << steps << " k~ " << rank << "  ";
    }
    d << "runtime " << elapsed << " s";
    return std::pair{ok, d.str()};
  });

  criterion("3", "1D connectivity: err(3/4) < err(2/3) < err(1/2) at t = 1 and err(3/4) <= 1e-5", [] {
    auto& s = shared_1d();
    double e[3];
    for (int L = 1; L <= 3; ++L) e[L - 1] = error_at(run_1d(s.model, Strategy::kpod, 1.5, 200, L), s.full, 200);
    const bool ok = e[2] < e[1] && e[1] < e[0] && e[2] <= 1e-5;
    return std::pair{ok, "1/2: " + sci(e[0]) + "  2/3: " + sci(e[1]) + "  3/4: " + sci(e[2])};
  });

  criterion("4a", "1D kPCA (beta = 1e-4) first component >= 99.0%", [] {
    const double f = shared_1d().model.kpca.spectrum.cumulative_fraction(1);
    return std::pair{f >= 0.99, "share " + std::to_string(f)};
  });

  criterion("5", "1D POD rank at eps = 1e-8 in [70, 80]", [] {
    const Index k = shared_1d().pod.rank();
    return std::pair{k >= 70 && k <= 80, "k = " + std::to_string(k)};
  });

  // 2D benchmark with 200 snapshots on the h = 0.02 mesh.
  {
    const auto t0 = Clock::now();
    std::optional<ModelBundle> model;
    std::string setup_error;
    try {
      OfflineConfig c;
      c.problem = ProblemId::adv2d;
      c.ns = 200;
      c.jobs = jobs();
      model = run_offline(c);
    } catch (const std::exception& e) {
      setup_error = e.what();
    }

    criterion("4b", "2D kPCA (beta = 1e-3, n_S = 200) first two components >= 99.5%", [&] {
      if (!model) throw std::runtime_error(setup_error);
      const double f = model->kpca.spectrum.cumulative_fraction(2);
      return std::pair{f >= 0.995, "share " + std::to_string(f)};
    });

    criterion("6", "2D n_S = 200 seed 7: kPOD 1/2 error <= 1e-2 and below POD at (0,50), (0.5,30), (0.7,20), runtime < 20 min", [&] {
      if (!model) throw std::runtime_error(setup_error);
      const adv2d::Problem2D problem = problem_2d_from(*model);
      const ReducedBasis pod = model_pod(*model);
      bool ok = true;
      std::ostringstream d;
      for (const auto& q : kQueries2D) {
        const adv2d::LinearSystem sys = adv2d::assemble_2d(problem, q);
        const Vector ref = adv2d::solve_full(sys);
        const double ek = relative_error(run_2d(*model, problem, sys, Strategy::kpod, q, 1, &pod).x, ref);
        const double ep = relative_error(run_2d(*model, problem, sys, Strategy::pod, q, 1, &pod).x, ref);
        ok = ok && ek <= 1e-2 && ek < ep;
        d << "(" << q.source << "," << q.angle_deg << "): kpod " << sci(ek) << " pod " << sci(ep) << "  ";
      }
      const double elapsed = seconds_since(t0);
      ok = ok && elapsed < 1200.0;
      d << "runtime " << elapsed << " s";
      return std::pair{ok, d.str()};
    });
  }

  criterion("7", "qPOD equals optimal-path kPOD with the all-snapshot patch to 1e-9 (20-snapshot 2D toy)", [] {
    const Toy2D& t = toy_2d();
    const LocalModel global = local_model(full_patch(0, 1, t.model.snapshots.size()), t.model.snapshots, t.model.epsilon, true);
    const ReducedBasis pod = model_pod(t.model);
    double worst = 0.0;
    for (const auto& q : kQueries2D) {
      const adv2d::LinearSystem sys = adv2d::assemble_2d(t.problem, q);
      const Vector direct = rb_solve_galerkin(sys.K, sys.f, global.basis);
      const Vector path = run_2d(t.model, t.problem, sys, Strategy::qpod, q, 1, &pod).x;
      worst = std::max(worst, relative_error(path, direct));
    }
    return std::pair{worst <= 1e-9, "max relative difference " + sci(worst)};
  });

  criterion("8a", "SVD truncation is monotone in eps and bases are orthonormal", [] {
    bool ok = true;
    double defect = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      Matrix M = test::random_matrix(40, 15, seed);
      for (Index j = 0; j < M.cols(); ++j) M.col(j) *= std::pow(0.4, static_cast<double>(j));
      Index previous = M.cols();
      for (double eps : {1e-12, 1e-8, 1e-5, 1e-3, 1e-1, 0.5}) {
        const ReducedBasis b = svd_truncate(M, eps);
        ok = ok && b.rank() <= previous;
        previous = b.rank();
        defect = std::max(defect, (b.columns.transpose() * b.columns - Matrix::Identity(b.rank(), b.rank())).cwiseAbs().maxCoeff());
      }
    }
    ok = ok && defect <= 1e-10;
    return std::pair{ok, "max orthonormality defect " + sci(defect)};
  });

  criterion("8b", "Galerkin orthogonality of every reduced solve on the optimal path (1e-9)", [] {
    const Toy2D& t = toy_2d();
    const OnlineContext ctx = make_context(t.model, Strategy::kpod);
    const ReducedBasis pod = model_pod(t.model);
    double worst = 0.0;
    std::size_t solves = 0;
    for (const auto& q : {adv2d::Params2D{0.0, 50.0}, {0.5, 30.0}, {0.7, 20.0}, {-0.5, 65.0}, {0.25, 12.0}}) {
      const adv2d::LinearSystem sys = adv2d::assemble_2d(t.problem, q);
      const Query2D r = run_2d(t.model, t.problem, sys, Strategy::kpod, q, 1, &pod);
      for (const auto& s : r.trace->steps) {
        const LocalModel m = local_model(patch(s.cell, s.level, t.model.geometry), t.model.snapshots, ctx.tolerance, true);
        const IterateResult x = kpod_solve_in_cell(s.cell, s.level, sys.K, sys.f, ctx);
        const Matrix& U = m.basis.columns;
        worst = std::max(worst, (U.transpose() * (sys.f - sys.K * x.x)).norm() / (U.transpose() * sys.f).norm());
        ++solves;
      }
    }
    return std::pair{worst <= 1e-9, std::to_string(solves) + " solves, max defect " + sci(worst)};
  });

  criterion("8c", "patches grow with the level; 1D patch sizes 3 and 5", [] {
    bool ok = true;
    for (Index k : {1, 2}) {
      const ReducedGeometry g = build_geometry(test::random_matrix(k, 80, 900 + static_cast<std::uint64_t>(k)));
      for (Index c = 0; c < g.size(); ++c) {
        std::vector<Index> prev;
        for (int L = 1; L <= 3; ++L) {
          const Patch p = patch(c, L, g);
          ok = ok && std::includes(p.members.begin(), p.members.end(), prev.begin(), prev.end());
          prev = p.members;
        }
      }
    }
    const ReducedGeometry& g1 = shared_1d().model.geometry;
    std::set<std::size_t> sizes1, sizes2;
    for (Index c = 0; c < g1.size(); ++c) {
      if (g1.adjacency[static_cast<std::size_t>(c)].size() != 2) continue;
      sizes1.insert(patch(c, 1, g1).members.size());
    }
    Matrix line(1, 30);
    for (Index i = 0; i < 30; ++i) line(0, i) = static_cast<double>((i * 11) % 30);
    const ReducedGeometry gl = build_geometry(line);
    for (Index c = 0; c < 30; ++c)
      if (line(0, c) >= 2 && line(0, c) <= 27) sizes2.insert(patch(c, 2, gl).members.size());
    ok = ok && sizes1 == std::set<std::size_t>{3} && sizes2 == std::set<std::size_t>{5};
    return std::pair{ok, "interior 1D level-1 sizes {3}, level-2 sizes {5}"};
  });

  criterion("8d", "locate_cell agrees with brute-force nearest site on 1000 probes", [] {
    const Matrix Z = test::random_matrix(2, 150, 77);
    const ReducedGeometry g = build_geometry(Z);
    int mismatches = 0;
    for (std::uint64_t p = 0; p < 1000; ++p) {
      const Vector z = 1.3 * test::random_matrix(2, 1, 10000 + p).col(0);
      Index best = 0;
      for (Index i = 1; i < Z.cols(); ++i)
        if ((Z.col(i) - z).squaredNorm() < (Z.col(best) - z).squaredNorm()) best = i;
      mismatches += locate_cell(z, g) != best;
    }
    return std::pair{mismatches == 0, std::to_string(mismatches) + " mismatches"};
  });

  criterion("8e", "snapshot reproduction: residual <= 1e-8 |f| at every training parameter", [] {
    const Toy2D& t = toy_2d();
    const OnlineContext ctx = make_context(t.model, Strategy::kpod);
    double worst = 0.0;
    for (Index j = 0; j < t.model.snapshots.size(); ++j) {
      const auto& p = t.model.snapshots.params[static_cast<std::size_t>(j)];
      const adv2d::LinearSystem sys = adv2d::assemble_2d(t.problem, {p[0], p[1]});
      const IterateResult r = kpod_iterate(t.model.kpca.Z.col(j), 1, sys.K, sys.f, ctx);
      worst = std::max(worst, (sys.f - sys.K * r.x).norm() / sys.f.norm());
    }
    return std::pair{worst <= 1e-8, "max relative residual " + sci(worst)};
  });

  criterion("8f", "model store round trip is bitwise", [] {
    const Toy2D& t = toy_2d();
    const fs::path dir = fs::temp_directory_path() / ("kpod-acceptance-" + std::to_string(std::random_device{}()));
    save_model(t.model, dir);
    const ModelBundle back = load_model(dir);
    fs::remove_all(dir);
    const ModelBundle& m = t.model;
    const bool ok = back.snapshots.X == m.snapshots.X && back.kpca.Z == m.kpca.Z && back.kpca.Vstar == m.kpca.Vstar &&
                    back.kpca.G == m.kpca.G && back.geometry.adjacency == m.geometry.adjacency &&
                    back.snapshots.params == m.snapshots.params && back.mesh == m.mesh;
    return std::pair{ok, ok ? "X, Z, Vstar, G, adjacency, params and mesh identical" : "difference after reload"};
  });

  std::cout << (failures == 0 ? "ALL PASS" : std::to_string(failures) + " criteria FAILED") << std::endl;
  return failures == 0 ? 0 : 1;
}
