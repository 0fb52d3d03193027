#pragma once

// Monte-Carlo comparison of DeepMUSIC, spectral MUSIC and Root-MUSIC
// against the stochastic CRB, plus latency measurements.

#include <cstdint>
#include <string>
#include <vector>

#include "deepmusic/array_sim.hpp"
#include "deepmusic/estimator.hpp"
#include "deepmusic/grid.hpp"

namespace dm::bench {

enum class Method { DeepMusic, SpectralMusic, RootMusic, SmoothedMusic };

const char* method_name(Method m);
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_list);

/// Sort-and-pair RMSE in degrees over all trials and targets.
double rmse(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& truths);

struct EvalConfig {
  ArrayConfig array;
  AngularGrid grid{-60.0, 60.0, 4096};
  int num_regions = 8;
  int num_sources = 2;
  int num_snapshots = 100;
  int trials = 100;
  std::vector<double> snr_db{0.0, 10.0, 20.0, 30.0};
  std::vector<double> rho{0.0, 0.25, 0.5, 0.75, 1.0};
  double corr_snr_db = 20.0;
  std::uint64_t seed = 1;
  /// Fixed DOAs plus one shared uniform offset in +-doa_jitter_deg per
  /// trial; empty means one random DOA per randomly chosen region.
  std::vector<double> doas_deg;
  double doa_jitter_deg = 0.0;
  int guard_steps = 2;
  /// Forward-backward smoothing subarray size; 0 means M - K.
  int smoothing_subarray = 0;
  std::vector<Method> methods{Method::SpectralMusic, Method::RootMusic};

  Partition partition() const;
  int subarray_size() const;
  void validate() const;
};

struct Row {
  std::string method;
  double sweep_value = 0.0;
  double rmse_deg = 0.0;
  double crb_deg = 0.0;
  double runtime_s = 0.0;
  double runtime_std_s = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

struct Table {
  std::string sweep;  // "snr_db", "rho" or "grid_points"
  std::vector<Row> rows;

  const Row& find(const std::string& method, double sweep_value) const;
  /// Columns method,sweep_value,rmse_deg,crb_deg,runtime_s,trials,seed.
  /// Runtimes are left empty unless with_timing, so tables from identical
  /// inputs are byte-identical.
  std::string to_csv(bool with_timing) const;
};

/// Per SNR: each method on the same sample covariance of every trial, then
/// one "crb" row.
Table run_rmse_vs_snr(const EvalConfig& cfg, DeepMusicModel* model);

/// K = 2 with correlation rho at cfg.corr_snr_db; spectral MUSIC appears
/// unsmoothed ("spectral_music") and smoothed ("smoothed_music").
Table run_correlation_sweep(const EvalConfig& cfg, DeepMusicModel* model);

struct TimingConfig {
  int repetitions = 50;
  int warmup = 5;
  double snr_db = 20.0;
  /// Grid sizes to time; empty means the evaluation grid only.
  std::vector<int> grid_points;
};

/// Plot data for the first trial at each SNR: the DeepMUSIC spectrum, the
/// spectral MUSIC spectrum of the same sample covariance and the noiseless
/// label spectrum, one row per grid point.
std::string spectra_csv(const EvalConfig& cfg, DeepMusicModel& model);

/// Mean and standard deviation of covariance-to-DOA latency per method and
/// grid size. DeepMUSIC is timed on its own grid only.
Table time_methods(const EvalConfig& cfg, const TimingConfig& timing, DeepMusicModel* model);

}  // namespace dm::bench
