#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kpod/model_store.hpp"
#include "kpod/online.hpp"
#include "kpod/problems/advection1d.hpp"
#include "kpod/problems/advection2d.hpp"

namespace kpod {

enum class ProblemId { adv1d, adv2d };

ProblemId parse_problem(const std::string& s);
std::string to_string(ProblemId p);

struct OfflineConfig {
  ProblemId problem = ProblemId::adv1d;
  double epsilon = 1e-8;
  /// centroid1d, centroid2d or gaussian; empty picks the problem's centroid kernel.
  std::string kernel;
  /// Defaults: 1e-4 (1D), 1e-3 (2D).
  std::optional<double> beta;
  /// Defaults: 1e-2 (1D), 1e-3 (2D).
  std::optional<double> kpca_tolerance;
  /// Reduced dimension. Defaults to 2 in 2D unless a tolerance is given.
  std::optional<int> rank;
  Centering centering = Centering::feature_space;
  // 2D only
  int ns = 200;
  std::uint64_t seed = adv2d::kDefaultSeed2D;
  double h = 0.02;
  int jobs = 1;
};

/// Campaign, kPCA fit and tessellation.
ModelBundle run_offline(const OfflineConfig& config);

/// Problem setup recorded in a bundle's descriptor.
adv1d::Grid1D grid_from(const ModelBundle& model);
adv2d::Problem2D problem_2d_from(const ModelBundle& model);
ProblemId problem_of(const ModelBundle& model);

enum class Strategy { kpod, pod, qpod, full };

Strategy parse_strategy(const std::string& s);
std::string to_string(Strategy s);

/// "L/L+1" with L >= 1; returns L.
int parse_levels(const std::string& s);

/// Default limit on quadratic basis columns for `Strategy::qpod`.
inline constexpr Index kDefaultQpodColumns = 5000;

OnlineContext make_context(const ModelBundle& model, Strategy strategy, Index max_basis_columns = kDefaultQpodColumns);

inline constexpr std::array<int, 4> kReportSteps1D = {50, 100, 150, 200};

/// One strategy marched over the 1D problem.
struct Run1D {
  Strategy strategy = Strategy::full;
  int base_level = 1;
  adv1d::Trajectory trajectory;
  /// Mean solves per step over steps 1..n (kPOD/qPOD only).
  double mean_steps(int n) const;
  double mean_rank(int n) const;
};

Run1D run_1d(const ModelBundle& model, Strategy strategy, double velocity, int n_steps, int base_level,
             const ReducedBasis* pod = nullptr);

/// Global centered POD of the stored snapshots at the model's epsilon.
ReducedBasis model_pod(const ModelBundle& model);

struct Query2D {
  adv2d::Params2D params;
  Strategy strategy = Strategy::full;
  Vector x;
  std::optional<PathTrace> trace;
};

Query2D run_2d(const ModelBundle& model, const adv2d::Problem2D& problem, const adv2d::LinearSystem& system,
               Strategy strategy, const adv2d::Params2D& params, int base_level, const ReducedBasis* pod = nullptr,
               Index max_basis_columns = kDefaultQpodColumns);

inline const std::vector<adv2d::Params2D> kQueries2D = {{0.0, 50.0}, {0.5, 30.0}, {0.7, 20.0}};

}  // namespace kpod
