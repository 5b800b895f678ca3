#include "kpod/online.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <sstream>

#include "kpod/error.hpp"

namespace kpod {

LocalModel local_model(const Patch& eta, const SnapshotSet& X, double tolerance, bool quadratic) {
  if (eta.members.empty()) throw Error(Errc::dimension, "local_model: empty patch");
  const Matrix local = X.select(eta.members);
  const Vector mean = local.rowwise().mean();
  const Matrix B = quadratic ? quadratic_basis(local, mean) : Matrix(local.colwise() - mean);
  LocalModel m{eta, svd_truncate(B, tolerance)};
  m.basis.offset = mean;
  return m;
}

void OnlineContext::validate() const {
  if (!snapshots || !kpca || !geometry) throw Error(Errc::usage, "online context is incomplete");
  if (snapshots->size() != kpca->size() || geometry->size() != kpca->size())
    throw Error(Errc::dimension, "kPCA model, geometry and snapshots disagree on n_S");
}

namespace {

Patch make_patch(Index cell, int level, const OnlineContext& ctx) {
  return ctx.patch_mode == PatchMode::all_snapshots ? full_patch(cell, level, ctx.snapshots->size())
                                                    : patch(cell, level, *ctx.geometry);
}

IterateResult solve_with(const LocalModel& local, Index cell, int level, const SparseMatrix& K,
                         const Vector& f, const OnlineContext& ctx) {
  IterateResult r;
  r.cell = cell;
  r.level = level;
  r.rank = local.rank();
  try {
    r.x = rb_solve_galerkin(K, f, local.basis);
  } catch (const Error& e) {
    std::ostringstream msg;
    msg << "local reduced solve failed in cell " << cell << " (level " << level << ", k~ " << r.rank
        << "): " << e.what();
    throw Error(e.code(), msg.str());
  }
  r.residual = (f - K * r.x).norm();
  r.z = forward_map(r.x, *ctx.kpca);
  r.next_cell = locate_cell(r.z, *ctx.geometry);
  return r;
}

struct LocalCache {
  std::optional<LocalModel> model;

  const LocalModel& get(const Patch& p, const OnlineContext& ctx) {
    if (!model || model->patch.members != p.members) {
      if (ctx.quadratic && ctx.max_basis_columns > 0 &&
          quadratic_column_count(std::ssize(p.members)) > ctx.max_basis_columns) {
        std::ostringstream msg;
        msg << "quadratic basis with " << quadratic_column_count(std::ssize(p.members))
            << " columns exceeds the memory guard of " << ctx.max_basis_columns;
        throw Error(Errc::usage, msg.str());
      }
      model = local_model(p, *ctx.snapshots, ctx.tolerance, ctx.quadratic);
    }
    model->patch = p;
    return *model;
  }
};

}  // namespace

IterateResult kpod_solve_in_cell(Index cell, int level, const SparseMatrix& K, const Vector& f,
                                 const OnlineContext& ctx) {
  ctx.validate();
  LocalCache cache;
  return solve_with(cache.get(make_patch(cell, level, ctx), ctx), cell, level, K, f, ctx);
}

IterateResult kpod_iterate(const Vector& z_guess, int level, const SparseMatrix& K, const Vector& f,
                           const OnlineContext& ctx) {
  ctx.validate();
  return kpod_solve_in_cell(locate_cell(z_guess, *ctx.geometry), level, K, f, ctx);
}

const char* to_string(PathStatus s) {
  switch (s) {
    case PathStatus::converged: return "converged";
    case PathStatus::cycle: return "cycle";
    case PathStatus::max_iterations: return "max_iterations";
  }
  return "unknown";
}

double PathTrace::mean_rank() const {
  if (steps.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& s : steps) sum += static_cast<double>(s.rank);
  return sum / static_cast<double>(steps.size());
}

PathResult optimal_path(const Vector& z0, int base_level, const SparseMatrix& K, const Vector& f,
                        const OnlineContext& ctx, int max_iterations) {
  ctx.validate();
  if (base_level < 1) throw Error(Errc::usage, "connectivity level must be at least 1");

  PathResult out;
  LocalCache cache;
  std::optional<IterateResult> best;
  const auto record = [&](IterateResult r) {
    out.trace.steps.push_back({r.z, r.cell, r.next_cell, r.level, r.rank, r.residual});
    if (!best || r.residual < best->residual) best = r;
    return r;
  };
  const auto solve = [&](Index cell, int level) {
    return record(solve_with(cache.get(make_patch(cell, level, ctx), ctx), cell, level, K, f, ctx));
  };

  Index cell = locate_cell(z0, *ctx.geometry);
  std::set<Index> visited{cell};
  std::set<Index> escalated;
  std::optional<IterateResult> best_escalated;
  while (std::ssize(out.trace.steps) < max_iterations) {
    const IterateResult r = solve(cell, base_level);
    if (r.next_cell != cell && !visited.contains(r.next_cell)) {
      cell = r.next_cell;
      visited.insert(cell);
      continue;
    }
    cell = r.next_cell;
    if (escalated.contains(cell)) {
      // A second escalation in the same cell would repeat an earlier solve.
      out.x = best_escalated->x;
      out.trace.status = PathStatus::cycle;
      return out;
    }
    if (std::ssize(out.trace.steps) >= max_iterations) break;
    const IterateResult check = solve(cell, base_level + 1);
    escalated.insert(cell);
    if (!best_escalated || check.residual < best_escalated->residual) best_escalated = check;
    if (check.next_cell == cell) {
      out.x = check.x;
      out.trace.status = PathStatus::converged;
      return out;
    }
    cell = check.next_cell;
    visited.insert(cell);
  }
  out.trace.status = PathStatus::max_iterations;
  out.x = best->x;
  return out;
}

void write_trace_csv(std::ostream& out, const PathTrace& trace) {
  out << "step[-],cell[-],level[-],k_tilde[-],residual[l2]\n";
  out.precision(17);
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const auto& s = trace.steps[i];
    out << i << ',' << s.cell + 1 << ',' << s.level << ',' << s.rank << ',' << s.residual << '\n';
  }
}

Vector init_guess(GuessMode mode, const GuessContext& context, const KpcaModel& model) {
  switch (mode) {
    case GuessMode::from_pod:
      if (!context.K || !context.f || !context.pod_basis)
        throw Error(Errc::usage, "POD initial guess needs K, f and a global POD basis");
      return forward_map(rb_solve_galerkin(*context.K, *context.f, *context.pod_basis), model);
    case GuessMode::from_previous_step:
      if (!context.previous_state) throw Error(Errc::usage, "previous-step initial guess needs the previous state");
      return forward_map(*context.previous_state, model);
  }
  throw Error(Errc::usage, "unknown initial-guess mode");
}

}  // namespace kpod
