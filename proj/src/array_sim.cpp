#include "deepmusic/array_sim.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepmusic/error.hpp"

namespace dm {

namespace {

void make_hermitian(CMatrix& m) {
  const Eigen::Index n = m.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = cdouble(m(i, i).real(), 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) m(j, i) = std::conj(m(i, j));
  }
}

void check_angle(double theta_deg) {
  require(std::isfinite(theta_deg) && theta_deg > -90.0 && theta_deg < 90.0,
          "angle " + std::to_string(theta_deg) + " deg outside (-90, 90)");
}

}  // namespace

void ArrayConfig::validate() const {
  require(num_elements >= 2, "array needs at least 2 elements");
  require(spacing_wavelengths > 0.0 && std::isfinite(spacing_wavelengths),
          "element spacing must be positive");
}

void SourceConfig::validate() const {
  const int k = num_sources();
  for (int i = 0; i < k; ++i) {
    check_angle(doas_deg[i]);
    for (int j = 0; j < i; ++j)
      require(doas_deg[i] != doas_deg[j], "duplicate DOA " + std::to_string(doas_deg[i]));
  }
  require(signal_covariance.rows() == k && signal_covariance.cols() == k,
          "signal covariance must be K x K");
  require(noise_variance >= 0.0, "noise variance must be nonnegative");
  if (k == 0) return;
  const double scale = signal_covariance.cwiseAbs().maxCoeff();
  require(((signal_covariance - signal_covariance.adjoint()).cwiseAbs().maxCoeff()) <= 1e-10 * scale,
          "signal covariance is not Hermitian");
  for (int i = 0; i < k; ++i)
    require(signal_covariance(i, i).real() > 0.0, "source powers must be positive");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(signal_covariance, Eigen::EigenvaluesOnly);
  require(es.eigenvalues().minCoeff() >= -1e-10 * es.eigenvalues().maxCoeff(),
          "signal covariance is not positive semidefinite");
}

SourceConfig SourceConfig::uncorrelated(std::vector<double> doas_deg, double power,
                                        double noise_variance) {
  SourceConfig src;
  const auto k = static_cast<Eigen::Index>(doas_deg.size());
  src.doas_deg = std::move(doas_deg);
  src.signal_covariance = CMatrix::Identity(k, k) * power;
  src.noise_variance = noise_variance;
  return src;
}

CVector steering_vector(double theta_deg, const ArrayConfig& cfg) {
  cfg.validate();
  check_angle(theta_deg);
  const double phase = -2.0 * std::numbers::pi * cfg.spacing_wavelengths * std::sin(deg2rad(theta_deg));
  CVector a(cfg.num_elements);
  for (int m = 0; m < cfg.num_elements; ++m) a(m) = std::polar(1.0, phase * m);
  return a;
}

CMatrix steering_matrix(std::span<const double> doas_deg, const ArrayConfig& cfg) {
  const auto k = static_cast<Eigen::Index>(doas_deg.size());
  CMatrix a(cfg.num_elements, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < i; ++j)
      require(doas_deg[i] != doas_deg[j], "duplicate DOA " + std::to_string(doas_deg[i]));
    a.col(i) = steering_vector(doas_deg[i], cfg);
  }
  return a;
}

CovMatrix ideal_covariance(const SourceConfig& src, const ArrayConfig& cfg) {
  cfg.validate();
  src.validate();
  const int m = cfg.num_elements;
  CMatrix r = CMatrix::Identity(m, m) * src.noise_variance;
  if (src.num_sources() > 0) {
    const CMatrix a = steering_matrix(src.doas_deg, cfg);
    r += a * src.signal_covariance * a.adjoint();
  }
  make_hermitian(r);
  return {std::move(r)};
}

CMatrix correlated_pair_covariance(double sigma1_sq, double sigma2_sq, double rho) {
  require(sigma1_sq > 0.0 && sigma2_sq > 0.0, "source variances must be positive");
  require(rho >= 0.0 && rho <= 1.0, "correlation coefficient must lie in [0, 1]");
  require(rho * rho <= sigma1_sq * sigma2_sq, "rho^2 > sigma1^2 sigma2^2: not positive semidefinite");
  CMatrix g(2, 2);
  g << sigma1_sq, rho, rho, sigma2_sq;
  return g;
}

CMatrix psd_factor(const CMatrix& gamma) {
  const Eigen::Index k = gamma.rows();
  if (k == 0) return CMatrix(0, 0);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gamma);
  const Eigen::VectorXd& lambda = es.eigenvalues();  // ascending
  const double cutoff = 1e-12 * lambda(k - 1);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = k - 1; i >= 0; --i)
    if (lambda(i) > cutoff) keep.push_back(i);
  CMatrix f(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    f.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(keep[c]) * std::sqrt(lambda(keep[c]));
  return f;
}

SnapshotMatrix simulate_snapshots(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots,
                                  Philox& rng) {
  cfg.validate();
  src.validate();
  require(num_snapshots >= 1, "need at least one snapshot");
  const int m = cfg.num_elements;
  const CMatrix a = steering_matrix(src.doas_deg, cfg);
  const CMatrix factor = psd_factor(src.signal_covariance);
  const CMatrix mixing = a * factor;  // M x rank
  const Eigen::Index rank = factor.cols();

  SnapshotMatrix y{CMatrix(m, num_snapshots)};
  CVector w(rank);
  for (int t = 0; t < num_snapshots; ++t) {
    for (Eigen::Index r = 0; r < rank; ++r) w(r) = rng.complex_normal(1.0);
    if (rank > 0) {
      y.data.col(t) = mixing * w;
    } else {
      y.data.col(t).setZero();
    }
    for (int i = 0; i < m; ++i) y.data(i, t) += rng.complex_normal(src.noise_variance);
  }
  return y;
}

SnapshotMatrix simulate_snapshots(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots,
                                  std::uint64_t seed) {
  Philox rng(seed);
  return simulate_snapshots(src, cfg, num_snapshots, rng);
}

CovMatrix sample_covariance(const SnapshotMatrix& y) {
  require(y.num_snapshots() >= 1, "need at least one snapshot");
  CMatrix r = y.data * y.data.adjoint() / static_cast<double>(y.num_snapshots());
  make_hermitian(r);
  return {std::move(r)};
}

}  // namespace dm
