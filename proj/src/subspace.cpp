#include "deepmusic/subspace.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "deepmusic/error.hpp"

namespace dm {

namespace {

EigenBasis decompose(const CovMatrix& r) {
  const int m = r.size();
  require(m >= 1 && r.data.cols() == m, "covariance must be square");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r.data);
  require(es.info() == Eigen::Success, "eigendecomposition failed");
  EigenBasis b;
  b.eigenvalues = es.eigenvalues().reverse();
  b.eigenvectors = es.eigenvectors().rowwise().reverse();
  return b;
}

cdouble horner(const std::vector<cdouble>& c, cdouble z) {
  cdouble acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
  return acc;
}

cdouble horner_derivative(const std::vector<cdouble>& c, cdouble z) {
  cdouble acc = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) acc = acc * z + c[k] * static_cast<double>(k);
  return acc;
}

cdouble polish_root(const std::vector<cdouble>& c, cdouble z) {
  double best = std::abs(horner(c, z));
  for (int it = 0; it < 30 && best > 0.0; ++it) {
    const cdouble d = horner_derivative(c, z);
    if (d == cdouble(0.0)) break;
    const cdouble next = z - horner(c, z) / d;
    const double val = std::abs(horner(c, next));
    if (!(val < best)) break;
    best = val;
    z = next;
  }
  return z;
}

std::vector<cdouble> polynomial_roots(std::vector<cdouble> c) {
  while (c.size() > 1 && std::abs(c.back()) == 0.0) c.pop_back();
  const auto degree = static_cast<Eigen::Index>(c.size()) - 1;
  if (degree < 1) return {};
  CMatrix companion = CMatrix::Zero(degree, degree);
  for (Eigen::Index k = 0; k < degree; ++k) companion(0, k) = -c[degree - 1 - k] / c[degree];
  for (Eigen::Index k = 1; k < degree; ++k) companion(k, k - 1) = 1.0;
  Eigen::ComplexEigenSolver<CMatrix> es(companion, false);
  require(es.info() == Eigen::Success, "polynomial rooting failed");
  std::vector<cdouble> roots(es.eigenvalues().data(), es.eigenvalues().data() + degree);
  for (auto& z : roots) z = polish_root(c, z);
  return roots;
}

}  // namespace

EigenBasis eigendecompose(const CovMatrix& r, int num_sources) {
  require(num_sources > 0 && num_sources < r.size(),
          "source count " + std::to_string(num_sources) + " must lie in (0, M)");
  EigenBasis b = decompose(r);
  b.signal_dim = num_sources;
  return b;
}

EigenBasis eigendecompose_thresholded(const CovMatrix& r, double rel_threshold) {
  EigenBasis b = decompose(r);
  const double cutoff = rel_threshold * std::max(b.eigenvalues(0), 0.0);
  int dim = 0;
  while (dim < b.size() && b.eigenvalues(dim) > cutoff) ++dim;
  b.signal_dim = std::min(dim, b.size() - 1);
  return b;
}

Spectrum music_spectrum(const EigenBasis& basis, const AngularGrid& grid, const ArrayConfig& cfg) {
  require(grid.num_points >= 1, "empty grid");
  require(grid.start_deg > -90.0 && grid.final_deg <= 90.0, "grid must lie inside (-90, 90)");
  require(cfg.num_elements == basis.size(), "array size does not match covariance size");
  require(basis.signal_dim < basis.size(), "noise subspace is empty");

  const int m = basis.size();
  const CMatrix un_h = basis.noise_subspace().adjoint();  // (M-K) x M

  Spectrum s;
  s.grid = grid;
  s.values.resize(grid.num_points);
  CVector a(m);
  CVector proj(un_h.rows());
  for (int i = 0; i < grid.num_points; ++i) {
    const double phase = -2.0 * std::numbers::pi * cfg.spacing_wavelengths * std::sin(deg2rad(grid.angle(i)));
    for (int e = 0; e < m; ++e) a(e) = std::polar(1.0, phase * e);
    proj.noalias() = un_h * a;
    double denom = proj.squaredNorm();
    if (denom < kMusicDenominatorFloor) {
      denom = kMusicDenominatorFloor;
      s.saturated = true;
    }
    s.values[i] = 1.0 / denom;
  }
  return s;
}

PeakSet spectral_peaks(const Spectrum& p, int num_sources) {
  const int n = static_cast<int>(p.values.size());
  require(num_sources >= 1, "need at least one peak");
  require(num_sources <= n, "more peaks requested than grid points");
  const auto& v = p.values;

  std::vector<int> maxima;
  for (int i = 0; i < n; ++i) {
    const bool left = i == 0 || v[i] > v[i - 1];
    const bool right = i == n - 1 || v[i] > v[i + 1];
    if (left && right && n > 1) maxima.push_back(i);
  }
  auto by_value = [&](int a, int b) { return v[a] > v[b] || (v[a] == v[b] && a < b); };
  std::stable_sort(maxima.begin(), maxima.end(), by_value);

  PeakSet out;
  std::vector<int> chosen(maxima.begin(), maxima.begin() + std::min<int>(num_sources, maxima.size()));
  if (static_cast<int>(chosen.size()) < num_sources) {
    out.degraded = true;
    std::vector<int> rest(n);
    std::iota(rest.begin(), rest.end(), 0);
    std::stable_sort(rest.begin(), rest.end(), by_value);
    for (int idx : rest) {
      if (static_cast<int>(chosen.size()) == num_sources) break;
      if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  out.indices = chosen;
  for (int idx : chosen) out.angles_deg.push_back(p.grid.angle(idx));
  return out;
}

std::vector<cdouble> root_music_polynomial(const EigenBasis& basis) {
  const int m = basis.size();
  const CMatrix un = basis.noise_subspace();
  const CMatrix c = un * un.adjoint();
  std::vector<cdouble> coeffs(2 * m - 1, cdouble(0.0));
  for (int r = 0; r < m; ++r)
    for (int col = 0; col < m; ++col) coeffs[r - col + m - 1] += c(r, col);
  return coeffs;
}

RootMusicResult root_music(const EigenBasis& basis, const ArrayConfig& cfg) {
  require(cfg.spacing_wavelengths <= 0.5, "Root-MUSIC needs spacing <= half a wavelength");
  require(cfg.num_elements == basis.size(), "array size does not match covariance size");
  require(basis.signal_dim >= 1 && basis.signal_dim < basis.size(), "invalid signal dimension");

  RootMusicResult out;
  out.roots = polynomial_roots(root_music_polynomial(basis));

  // Candidates on or inside the unit circle, nearest to it first. A root
  // just outside is accepted only if its reciprocal partner is not taken,
  // which covers the numerically split double roots of noiseless input.
  constexpr double kOutsideTol = 1e-6;
  constexpr double kPairTol = 1e-5;
  std::vector<cdouble> cand;
  for (const auto& z : out.roots)
    if (std::abs(z) <= 1.0 + kOutsideTol && std::abs(z) > 0.0) cand.push_back(z);
  std::stable_sort(cand.begin(), cand.end(), [](cdouble a, cdouble b) {
    return std::abs(1.0 - std::abs(a)) < std::abs(1.0 - std::abs(b));
  });

  std::vector<cdouble> chosen;
  const double scale = 2.0 * std::numbers::pi * cfg.spacing_wavelengths;
  for (const auto& z : cand) {
    if (static_cast<int>(chosen.size()) == basis.signal_dim) break;
    bool partner = false;
    for (const auto& s : chosen)
      if (std::abs(z - 1.0 / std::conj(s)) < kPairTol || std::abs(z - s) < kPairTol * 1e-3) partner = true;
    if (partner) continue;
    const double u = std::arg(z) / scale;
    if (u < -1.0 || u > 1.0) continue;
    chosen.push_back(z);
    out.angles_deg.push_back(rad2deg(std::asin(u)));
  }
  out.degraded = static_cast<int>(out.angles_deg.size()) < basis.signal_dim;
  std::sort(out.angles_deg.begin(), out.angles_deg.end());
  return out;
}

CovMatrix forward_backward_smooth(const CovMatrix& r, int subarray_size) {
  const int m = r.size();
  require(subarray_size >= 1, "subarray size must be positive");
  require(subarray_size <= m, "subarray size " + std::to_string(subarray_size) + " exceeds array size " +
                                  std::to_string(m));
  const int count = m - subarray_size + 1;
  CMatrix fwd = CMatrix::Zero(subarray_size, subarray_size);
  for (int p = 0; p < count; ++p) fwd += r.data.block(p, p, subarray_size, subarray_size);
  fwd /= static_cast<double>(count);
  // J conj(F) J reverses both index orders.
  const CMatrix bwd = fwd.conjugate().reverse();
  CMatrix out = (fwd + bwd) / 2.0;
  for (int i = 0; i < subarray_size; ++i) {
    out(i, i) = cdouble(out(i, i).real(), 0.0);
    for (int j = i + 1; j < subarray_size; ++j) out(j, i) = std::conj(out(i, j));
  }
  return {std::move(out)};
}

Eigen::MatrixXd stochastic_crb_matrix(const SourceConfig& src, const ArrayConfig& cfg,
                                      int num_snapshots) {
  cfg.validate();
  src.validate();
  const int k = src.num_sources();
  const int m = cfg.num_elements;
  require(k >= 1 && k < m, "CRB needs 0 < K < M");
  require(num_snapshots >= 1, "CRB needs T >= 1");
  require(src.noise_variance > 0.0, "CRB needs positive noise variance");

  const CMatrix a = steering_matrix(src.doas_deg, cfg);
  CMatrix d(m, k);
  for (int s = 0; s < k; ++s) {
    const double w = -2.0 * std::numbers::pi * cfg.spacing_wavelengths * std::cos(deg2rad(src.doas_deg[s]));
    for (int e = 0; e < m; ++e) d(e, s) = cdouble(0.0, w * e) * a(e, s);
  }

  const CMatrix aha = a.adjoint() * a;
  Eigen::FullPivLU<CMatrix> lu(aha);
  lu.setThreshold(1e-10);
  require(lu.isInvertible(), "A^H A is singular");
  const CMatrix proj_perp = CMatrix::Identity(m, m) - a * lu.inverse() * a.adjoint();

  const CMatrix r = ideal_covariance(src, cfg).data;
  const CMatrix rinv_a = r.ldlt().solve(a);
  const CMatrix& g = src.signal_covariance;
  const CMatrix inner = g * (a.adjoint() * rinv_a) * g;
  const CMatrix h = (d.adjoint() * proj_perp * d).cwiseProduct(inner.transpose());
  const Eigen::MatrixXd fim = h.real();
  const Eigen::MatrixXd inv = fim.ldlt().solve(Eigen::MatrixXd::Identity(k, k));
  return inv * (src.noise_variance / (2.0 * num_snapshots));
}

std::vector<double> stochastic_crb(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots) {
  const Eigen::MatrixXd c = stochastic_crb_matrix(src, cfg, num_snapshots);
  std::vector<double> out(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) out[i] = rad2deg(std::sqrt(c(i, i)));
  return out;
}

}  // namespace dm
