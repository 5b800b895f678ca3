#pragma once

#include <optional>
#include <span>
#include <vector>

#include "kpod/linalg.hpp"

namespace kpod {

/// Abscissa-weighted centre of mass of a trace, together with the mean
/// half-squared value: (int s u / int u, int u^2/2 / int u).
struct Centroid {
  double position = 0.0;
  double height = 0.0;
};

/// Trapezoidal centroid of nodal values `u` sampled at strictly increasing
/// `abscissa`. Throws `Errc::numerical` ("massless trace") below the mass floor.
Centroid centroid_1d(std::span<const double> u, std::span<const double> abscissa);

/// As `centroid_1d`, but a massless trace yields (midpoint, 0).
Centroid centroid_or_fallback(std::span<const double> u, std::span<const double> abscissa);

/// A parametrized piece of boundary: state entries `nodes[i]` sit at arclength
/// `abscissa[i]`.
struct BoundaryTrace {
  std::vector<Index> nodes;
  std::vector<double> abscissa;

  std::vector<double> gather(const Vector& x) const;
};

enum class KernelKind { centroid_1d, centroid_2d, gaussian_euclidean };

/// Gaussian-type kernel exp(-beta * d^2) where d is a weighted distance between
/// features of the two states (centroids or the raw state vector).
struct KernelSpec {
  KernelKind kind = KernelKind::gaussian_euclidean;
  double beta = 1.0;

  // centroid_1d: the state holds interior values of a uniform grid on
  // [domain_begin, domain_end] with homogeneous Dirichlet ends.
  double domain_begin = 0.0;
  double domain_end = 4.0;

  // centroid_2d: inlet is parametrized over a length of 2, outlet over 4.
  BoundaryTrace inlet;
  BoundaryTrace outlet;
  double inlet_scale = 2.0;
  double outlet_scale = 4.0;

  using Features = std::vector<double>;

  Features features(const Vector& x) const;
  /// Symmetric in its arguments bit for bit.
  double evaluate(const Features& a, const Features& b) const;
  double operator()(const Vector& u, const Vector& v) const { return evaluate(features(u), features(v)); }
};

KernelSpec make_centroid_1d_kernel(double beta, double begin = 0.0, double end = 4.0);
KernelSpec make_centroid_2d_kernel(double beta, BoundaryTrace inlet, BoundaryTrace outlet);
KernelSpec make_gaussian_kernel(double beta);

/// exp(-beta |C(u) - C(v)|^2) on interior vectors of a uniform grid over [0,4].
double kernel_centroid_1d(const Vector& u, const Vector& v, double beta);

/// Gram matrix centering in feature space.
enum class Centering { none, feature_space };

struct KpcaOptions {
  double tolerance = 1e-2;
  Centering centering = Centering::feature_space;
  /// Overrides the tolerance-based choice of the reduced dimension.
  std::optional<int> rank;
};

/// Fitted kernel PCA. `Z.col(j)` and `forward_map` of snapshot j share one
/// arithmetic path, so they agree bit for bit.
struct KpcaModel {
  KernelSpec kernel;
  Centering centering = Centering::feature_space;
  std::vector<KernelSpec::Features> training_features;
  Matrix G;       // raw Gram matrix
  Matrix Vstar;   // n_S x k
  Spectrum spectrum;
  Matrix Z;       // k x n_S
  Vector gram_row_mean;
  double gram_mean = 0.0;

  Index size() const { return G.rows(); }
  int rank() const { return static_cast<int>(Vstar.cols()); }

  /// Kernel vector centered the same way as the Gram matrix used for the fit.
  Vector centered(const Vector& g) const;
  /// z = Vstar^T centered(g).
  Vector project(const Vector& g) const;
};

/// G_ij = kappa(x^i, x^j), computed for i <= j and mirrored. Throws when the
/// matrix fails the PSD check (smallest eigenvalue below -1e-8 * largest).
Matrix gram_matrix(const SnapshotSet& X, const KernelSpec& kernel);

/// [g(x)]_i = kappa(x^i, x).
Vector kvector(const Vector& x, const KpcaModel& model);

KpcaModel kpca_fit(const SnapshotSet& X, const KernelSpec& kernel, const KpcaOptions& options);
KpcaModel kpca_fit(const SnapshotSet& X, const KernelSpec& kernel, double tolerance);

/// Rebuilds a model from a persisted Gram matrix and projection; recomputes the
/// features and checks Z against the projection of G.
KpcaModel kpca_restore(const SnapshotSet& X, const KernelSpec& kernel, Centering centering, Matrix G,
                       Matrix Vstar, Spectrum spectrum, Matrix Z);

Vector forward_map(const Vector& x, const KpcaModel& model);

/// Inverse-squared-distance weights over the columns `eta` of the model's Z.
std::vector<double> preimage_rbf(const Vector& z, const KpcaModel& model, std::span<const Index> eta);
/// Same rule against an explicit point set (k x m).
std::vector<double> preimage_rbf(const Vector& z, const Matrix& points);

/// Minimum-norm w with Z w = z (Moore-Penrose, cutoff 1e-12 sigma_max).
Vector preimage_pinv(const Vector& z, const Matrix& Z);

}  // namespace kpod
