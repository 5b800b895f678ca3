#include "kpod/kpca.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kpod/error.hpp"

namespace kpod {

namespace {

struct TraceIntegrals {
  double mass = 0.0;
  double moment = 0.0;
  double energy = 0.0;
  double max_abs = 0.0;
  double length = 0.0;
};

TraceIntegrals integrate(std::span<const double> u, std::span<const double> s) {
  if (u.size() != s.size() || u.size() < 2)
    throw Error(Errc::dimension, "centroid: trace needs at least two matching samples");
  TraceIntegrals r;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double ds = s[i + 1] - s[i];
    if (!(ds > 0.0)) throw Error(Errc::usage, "centroid: abscissa must be strictly increasing");
    r.mass += 0.5 * ds * (u[i] + u[i + 1]);
    r.moment += 0.5 * ds * (s[i] * u[i] + s[i + 1] * u[i + 1]);
    r.energy += 0.25 * ds * (u[i] * u[i] + u[i + 1] * u[i + 1]);
  }
  for (double v : u) r.max_abs = std::max(r.max_abs, std::abs(v));
  r.length = s.back() - s.front();
  return r;
}

bool massless(const TraceIntegrals& r) {
  return std::abs(r.mass) < 1e-12 * r.length * std::max(r.max_abs, 1e-30);
}

}  // namespace

Centroid centroid_1d(std::span<const double> u, std::span<const double> abscissa) {
  const TraceIntegrals r = integrate(u, abscissa);
  if (massless(r)) throw Error(Errc::numerical, "massless trace");
  return {r.moment / r.mass, r.energy / r.mass};
}

Centroid centroid_or_fallback(std::span<const double> u, std::span<const double> abscissa) {
  const TraceIntegrals r = integrate(u, abscissa);
  if (massless(r)) return {0.5 * (abscissa.front() + abscissa.back()), 0.0};
  return {r.moment / r.mass, r.energy / r.mass};
}

std::vector<double> BoundaryTrace::gather(const Vector& x) const {
  std::vector<double> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = x[nodes[i]];
  return out;
}

KernelSpec::Features KernelSpec::features(const Vector& x) const {
  switch (kind) {
    case KernelKind::centroid_1d: {
      // Pad the eliminated Dirichlet ends with zeros.
      const Index n = x.size() + 1;
      const double h = (domain_end - domain_begin) / static_cast<double>(n);
      std::vector<double> u(n + 1, 0.0), s(n + 1);
      for (Index i = 0; i <= n; ++i) s[i] = domain_begin + h * static_cast<double>(i);
      s[n] = domain_end;
      for (Index i = 0; i < x.size(); ++i) u[i + 1] = x[i];
      const Centroid c = centroid_1d(u, s);
      return {c.position, c.height};
    }
    case KernelKind::centroid_2d: {
      const Centroid ci = centroid_or_fallback(inlet.gather(x), inlet.abscissa);
      const Centroid co = centroid_or_fallback(outlet.gather(x), outlet.abscissa);
      return {ci.position, ci.height, co.position, co.height};
    }
    case KernelKind::gaussian_euclidean:
      return {x.data(), x.data() + x.size()};
  }
  return {};
}

double KernelSpec::evaluate(const Features& a, const Features& b) const {
  if (a.size() != b.size()) throw Error(Errc::dimension, "kernel: feature size mismatch");
  double d2 = 0.0;
  if (kind == KernelKind::centroid_2d) {
    const double wi = 1.0 / (inlet_scale * inlet_scale);
    const double wo = 1.0 / (outlet_scale * outlet_scale);
    const auto sq = [&](std::size_t i) { return (a[i] - b[i]) * (a[i] - b[i]); };
    d2 = (sq(0) + sq(1)) * wi + (sq(2) + sq(3)) * wo;
  } else {
    for (std::size_t i = 0; i < a.size(); ++i) d2 += (a[i] - b[i]) * (a[i] - b[i]);
  }
  return std::exp(-beta * d2);
}

KernelSpec make_centroid_1d_kernel(double beta, double begin, double end) {
  if (!(beta > 0.0)) throw Error(Errc::usage, "kernel beta must be positive");
  KernelSpec k;
  k.kind = KernelKind::centroid_1d;
  k.beta = beta;
  k.domain_begin = begin;
  k.domain_end = end;
  return k;
}

KernelSpec make_centroid_2d_kernel(double beta, BoundaryTrace inlet, BoundaryTrace outlet) {
  if (!(beta > 0.0)) throw Error(Errc::usage, "kernel beta must be positive");
  KernelSpec k;
  k.kind = KernelKind::centroid_2d;
  k.beta = beta;
  k.inlet = std::move(inlet);
  k.outlet = std::move(outlet);
  return k;
}

KernelSpec make_gaussian_kernel(double beta) {
  if (!(beta > 0.0)) throw Error(Errc::usage, "kernel beta must be positive");
  KernelSpec k;
  k.kind = KernelKind::gaussian_euclidean;
  k.beta = beta;
  return k;
}

double kernel_centroid_1d(const Vector& u, const Vector& v, double beta) {
  return make_centroid_1d_kernel(beta)(u, v);
}

namespace {

Matrix gram_from_features(const std::vector<KernelSpec::Features>& features, const KernelSpec& kernel) {
  const Index n = std::ssize(features);
  Matrix G(n, n);
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i <= j; ++i) G(i, j) = G(j, i) = kernel.evaluate(features[i], features[j]);
  return G;
}

void check_psd(const Matrix& G) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(G, Eigen::EigenvaluesOnly);
  const Vector& lambda = eig.eigenvalues();
  const double lo = lambda.minCoeff(), hi = lambda.maxCoeff();
  if (lo < -1e-8 * std::max(hi, 0.0)) {
    std::ostringstream msg;
    msg << "Gram matrix is not positive semidefinite (most negative eigenvalue " << lo << ")";
    throw Error(Errc::numerical, msg.str());
  }
}

std::vector<KernelSpec::Features> all_features(const SnapshotSet& X, const KernelSpec& kernel) {
  std::vector<KernelSpec::Features> out;
  out.reserve(static_cast<std::size_t>(X.size()));
  for (Index j = 0; j < X.size(); ++j) out.push_back(kernel.features(X.X.col(j)));
  return out;
}

void set_centering(KpcaModel& m) {
  m.gram_row_mean = m.G.rowwise().mean();
  m.gram_mean = m.gram_row_mean.mean();
}

}  // namespace

Matrix gram_matrix(const SnapshotSet& X, const KernelSpec& kernel) {
  X.validate();
  Matrix G = gram_from_features(all_features(X, kernel), kernel);
  check_psd(G);
  return G;
}

Vector KpcaModel::centered(const Vector& g) const {
  if (centering == Centering::none) return g;
  return (g - gram_row_mean).array() - (g.mean() - gram_mean);
}

Vector KpcaModel::project(const Vector& g) const {
  const Vector c = centered(g);
  Vector z(Vstar.cols());
  for (Index r = 0; r < Vstar.cols(); ++r) z[r] = Vstar.col(r).dot(c);
  return z;
}

Vector kvector(const Vector& x, const KpcaModel& model) {
  const auto fx = model.kernel.features(x);
  Vector g(model.size());
  for (Index i = 0; i < g.size(); ++i) g[i] = model.kernel.evaluate(model.training_features[i], fx);
  return g;
}

Vector forward_map(const Vector& x, const KpcaModel& model) { return model.project(kvector(x, model)); }

KpcaModel kpca_fit(const SnapshotSet& X, const KernelSpec& kernel, const KpcaOptions& options) {
  X.validate();
  KpcaModel m;
  m.kernel = kernel;
  m.centering = options.centering;
  m.training_features = all_features(X, kernel);
  m.G = gram_from_features(m.training_features, kernel);
  check_psd(m.G);
  if ((m.G.array() == m.G(0, 0)).all())
    throw Error(Errc::numerical, "kernel cannot separate training set");
  set_centering(m);

  const Index n = m.size();
  Matrix Gc(n, n);
  for (Index j = 0; j < n; ++j) Gc.col(j) = m.centered(m.G.col(j));

  Eigen::BDCSVD<Matrix> svd(Gc, Eigen::ComputeThinV);
  const Vector& sigma = svd.singularValues();
  std::vector<double> values(sigma.data(), sigma.data() + sigma.size());
  try {
    m.spectrum = make_spectrum(std::move(values), options.tolerance);
  } catch (const Error& e) {
    if (e.code() == Errc::numerical) throw Error(Errc::numerical, "kernel cannot separate training set");
    throw;
  }
  if (options.rank) {
    if (*options.rank < 1 || *options.rank > n)
      throw Error(Errc::usage, "requested kPCA rank outside [1, n_S]");
    m.spectrum.rank = *options.rank;
  }
  m.Vstar = svd.matrixV().leftCols(m.spectrum.rank);

  m.Z.resize(m.rank(), n);
  for (Index j = 0; j < n; ++j) m.Z.col(j) = m.project(m.G.col(j));
  return m;
}

KpcaModel kpca_fit(const SnapshotSet& X, const KernelSpec& kernel, double tolerance) {
  KpcaOptions options;
  options.tolerance = tolerance;
  return kpca_fit(X, kernel, options);
}

KpcaModel kpca_restore(const SnapshotSet& X, const KernelSpec& kernel, Centering centering, Matrix G,
                       Matrix Vstar, Spectrum spectrum, Matrix Z) {
  X.validate();
  const Index n = X.size();
  if (G.rows() != n || G.cols() != n) throw Error(Errc::dimension, "Gram matrix shape does not match n_S");
  if (Vstar.rows() != n || Vstar.cols() < 1) throw Error(Errc::dimension, "Vstar shape does not match n_S");
  if (Z.rows() != Vstar.cols() || Z.cols() != n) throw Error(Errc::dimension, "Z shape does not match k x n_S");
  if (spectrum.rank != Vstar.cols()) throw Error(Errc::dimension, "spectrum rank does not match Vstar columns");
  if (!std::is_sorted(spectrum.values.rbegin(), spectrum.values.rend()))
    throw Error(Errc::numerical, "stored spectrum is not sorted descending");

  KpcaModel m;
  m.kernel = kernel;
  m.centering = centering;
  m.training_features = all_features(X, kernel);
  m.G = std::move(G);
  m.Vstar = std::move(Vstar);
  m.spectrum = std::move(spectrum);
  m.Z = std::move(Z);
  set_centering(m);
  for (Index j = 0; j < n; ++j)
    if (m.project(m.G.col(j)) != m.Z.col(j))
      throw Error(Errc::numerical, "stored Z is not the projection of the stored Gram matrix");
  return m;
}

std::vector<double> preimage_rbf(const Vector& z, const Matrix& points) {
  const Index m = points.cols();
  if (m < 1) throw Error(Errc::dimension, "preimage_rbf: empty neighbourhood");
  std::vector<double> w(static_cast<std::size_t>(m), 0.0);
  for (Index i = 0; i < m; ++i) {
    if ((points.col(i) - z).squaredNorm() == 0.0) {
      w[static_cast<std::size_t>(i)] = 1.0;
      return w;
    }
  }
  double total = 0.0;
  for (Index i = 0; i < m; ++i) {
    w[static_cast<std::size_t>(i)] = 1.0 / (points.col(i) - z).squaredNorm();
    total += w[static_cast<std::size_t>(i)];
  }
  for (double& v : w) v /= total;
  return w;
}

std::vector<double> preimage_rbf(const Vector& z, const KpcaModel& model, std::span<const Index> eta) {
  Matrix pts(model.Z.rows(), std::ssize(eta));
  for (Index j = 0; j < pts.cols(); ++j) pts.col(j) = model.Z.col(eta[j]);
  return preimage_rbf(z, pts);
}

Vector preimage_pinv(const Vector& z, const Matrix& Z) {
  if (Z.rows() != z.size()) throw Error(Errc::dimension, "preimage_pinv: size mismatch");
  Eigen::JacobiSVD<Matrix> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? 1e-12 * s[0] : 0.0;
  Vector coeff = svd.matrixU().transpose() * z;
  for (Index i = 0; i < s.size(); ++i) coeff[i] = s[i] > cutoff ? coeff[i] / s[i] : 0.0;
  return svd.matrixV() * coeff;
}

}  // namespace kpod
