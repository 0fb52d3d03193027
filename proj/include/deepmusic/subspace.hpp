#pragma once

// Classical subspace baselines: eigendecomposition, spectral MUSIC, peak
// picking, Root-MUSIC, forward-backward spatial smoothing and the stochastic
// Cramer-Rao bound.

#include <vector>

#include "deepmusic/array_sim.hpp"
#include "deepmusic/grid.hpp"

namespace dm {

struct EigenBasis {
  Eigen::VectorXd eigenvalues;  // descending
  CMatrix eigenvectors;         // columns match eigenvalues
  int signal_dim = 0;

  int size() const { return static_cast<int>(eigenvalues.size()); }
  CMatrix signal_subspace() const { return eigenvectors.leftCols(signal_dim); }
  CMatrix noise_subspace() const { return eigenvectors.rightCols(size() - signal_dim); }
};

/// Hermitian eigendecomposition with K leading eigenvectors as signal subspace.
EigenBasis eigendecompose(const CovMatrix& r, int num_sources);

/// Signal dimension chosen as the count of eigenvalues above
/// rel_threshold * lambda_max; used for noiseless (exactly singular) inputs.
EigenBasis eigendecompose_thresholded(const CovMatrix& r, double rel_threshold);

struct Spectrum {
  std::vector<double> values;
  AngularGrid grid;
  bool saturated = false;  // some denominator was clamped
};

inline constexpr double kMusicDenominatorFloor = 1e-18;

/// P(theta) = 1 / ||U_N^H a(theta)||^2 over every grid point.
Spectrum music_spectrum(const EigenBasis& basis, const AngularGrid& grid, const ArrayConfig& cfg);

struct PeakSet {
  std::vector<double> angles_deg;  // ascending
  std::vector<int> indices;        // grid indices matching angles_deg
  bool degraded = false;           // fewer than K strict local maxima existed
};

/// K largest strict local maxima; endpoints compare against their single
/// neighbour. Shortfalls are padded from the largest remaining values.
PeakSet spectral_peaks(const Spectrum& p, int num_sources);

struct RootMusicResult {
  std::vector<double> angles_deg;  // ascending
  bool degraded = false;
  std::vector<cdouble> roots;      // all polynomial roots, polished
};

/// Coefficients of z^(M-1) a^H(z) U_N U_N^H a(z), lowest degree first
/// (2M-1 values).
std::vector<cdouble> root_music_polynomial(const EigenBasis& basis);

RootMusicResult root_music(const EigenBasis& basis, const ArrayConfig& cfg);

/// Average of the forward subarray covariances and their exchange-conjugated
/// (backward) counterparts.
CovMatrix forward_backward_smooth(const CovMatrix& r, int subarray_size);

/// Stochastic CRB matrix in rad^2:
/// (sigma^2 / 2T) { Re[(D^H P_A^perp D) .* (Gamma A^H R^-1 A Gamma)^T] }^-1.
Eigen::MatrixXd stochastic_crb_matrix(const SourceConfig& src, const ArrayConfig& cfg,
                                      int num_snapshots);

/// Per-source standard-deviation bounds in degrees.
std::vector<double> stochastic_crb(const SourceConfig& src, const ArrayConfig& cfg, int num_snapshots);

}  // namespace dm
