#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "kpod/geometry.hpp"
#include "kpod/kpca.hpp"
#include "kpod/linalg.hpp"

namespace kpod {

/// Affine local space around a patch: offset is the patch mean, columns the
/// truncated left singular vectors of the (quadratic) centered patch basis.
struct LocalModel {
  Patch patch;
  ReducedBasis basis;

  Index rank() const { return basis.rank(); }
};

LocalModel local_model(const Patch& eta, const SnapshotSet& X, double tolerance, bool quadratic);

enum class PatchMode {
  delaunay,       // patches from the reduced-space tessellation
  all_snapshots,  // every patch is the whole training set (quadratic POD)
};

/// Read-only offline artifacts shared by the online queries.
struct OnlineContext {
  const SnapshotSet* snapshots = nullptr;
  const KpcaModel* kpca = nullptr;
  const ReducedGeometry* geometry = nullptr;
  double tolerance = 1e-8;
  bool quadratic = true;
  PatchMode patch_mode = PatchMode::delaunay;
  /// Guard against quadratic bases too large to decompose; 0 disables it.
  Index max_basis_columns = 0;

  void validate() const;
};

struct IterateResult {
  Vector x;
  Vector z;
  Index cell = 0;        // cell whose patch produced the solve
  Index next_cell = 0;   // cell containing z
  int level = 1;
  Index rank = 0;        // k-tilde
  double residual = 0.0; // |f - K x|_2
};

/// One local reduced solve around the cell containing `z_guess`.
IterateResult kpod_iterate(const Vector& z_guess, int level, const SparseMatrix& K, const Vector& f,
                           const OnlineContext& ctx);
/// Same, with the patch cell given explicitly.
IterateResult kpod_solve_in_cell(Index cell, int level, const SparseMatrix& K, const Vector& f,
                                 const OnlineContext& ctx);

/// `cycle`: an escalated solve left its cell and the path came back to a cell
/// that had already been escalated; the best escalated solve is returned.
enum class PathStatus { converged, cycle, max_iterations };

const char* to_string(PathStatus s);

struct PathStep {
  Vector z;
  Index cell = 0;
  Index next_cell = 0;
  int level = 1;
  Index rank = 0;
  double residual = 0.0;
};

struct PathTrace {
  std::vector<PathStep> steps;
  PathStatus status = PathStatus::converged;

  std::size_t solves() const { return steps.size(); }
  double mean_rank() const;
};

struct PathResult {
  Vector x;
  PathTrace trace;
};

inline constexpr int kMaxPathIterations = 25;

/// Optimal-path iteration: local solves at `base_level` move from cell to cell
/// until the image stays in the current (or an already visited) cell; then one
/// solve at `base_level + 1` either confirms the cell and ends the search or
/// restarts it from the cell it lands in.
PathResult optimal_path(const Vector& z0, int base_level, const SparseMatrix& K, const Vector& f,
                        const OnlineContext& ctx, int max_iterations = kMaxPathIterations);

/// Trace rows `step,cell,level,k_tilde,residual` with a header.
void write_trace_csv(std::ostream& out, const PathTrace& trace);

enum class GuessMode { from_pod, from_previous_step };

struct GuessContext {
  const SparseMatrix* K = nullptr;
  const Vector* f = nullptr;
  const ReducedBasis* pod_basis = nullptr;
  const Vector* previous_state = nullptr;
};

Vector init_guess(GuessMode mode, const GuessContext& context, const KpcaModel& model);

}  // namespace kpod
