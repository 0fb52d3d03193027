#pragma once

// Far-field narrowband sources on a uniform linear array: steering vectors,
// ideal and sample covariance matrices, and seeded snapshot simulation.
// Angles are degrees at every public entry point.

#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "deepmusic/rng.hpp"

namespace dm {

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct ArrayConfig {
  int num_elements = 16;
  double spacing_wavelengths = 0.5;

  void validate() const;
};

struct SourceConfig {
  std::vector<double> doas_deg;
  CMatrix signal_covariance;  // K x K, Hermitian PSD
  double noise_variance = 0.0;

  int num_sources() const { return static_cast<int>(doas_deg.size()); }
  void validate() const;

  /// Independent sources with a common power.
  static SourceConfig uncorrelated(std::vector<double> doas_deg, double power,
                                   double noise_variance);
};

struct SnapshotMatrix {
  CMatrix data;  // M x T, one snapshot per column

  int num_snapshots() const { return static_cast<int>(data.cols()); }
};

struct CovMatrix {
  CMatrix data;  // M x M

  int size() const { return static_cast<int>(data.rows()); }
};

CVector steering_vector(double theta_deg, const ArrayConfig& cfg);

/// Columns are steering vectors; duplicate angles are rejected.
CMatrix steering_matrix(std::span<const double> doas_deg, const ArrayConfig& cfg);

/// A Gamma A^H + sigma_n^2 I, mirrored from the upper triangle so the result
/// is exactly Hermitian.
CovMatrix ideal_covariance(const SourceConfig& src, const ArrayConfig& cfg);

/// [[s1, rho], [rho, s2]] for a correlated source pair.
CMatrix correlated_pair_covariance(double sigma1_sq, double sigma2_sq, double rho);

/// Rank-revealing square-root factor F of a Hermitian PSD matrix, F F^H = G.
/// Eigenvalues below 1e-12 * lambda_max are dropped, so F may have fewer
/// columns than G has rows.
CMatrix psd_factor(const CMatrix& gamma);

SnapshotMatrix simulate_snapshots(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots,
                                  Philox& rng);
SnapshotMatrix simulate_snapshots(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots,
                                  std::uint64_t seed);

/// (1/T) Y Y^H, mirrored to exact Hermitian symmetry.
CovMatrix sample_covariance(const SnapshotMatrix& y);

/// Noise variance for unit-power sources at the given SNR.
inline double noise_variance_for_snr(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

}  // namespace dm
