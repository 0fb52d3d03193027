#pragma once

// Network inputs, partitioned MUSIC-spectrum labels, and the training corpus
// generator together with its on-disk format.
//
// Dataset file (all little-endian):
//   "DMDS" | u16 version | u32 M, N, Q, L, K, J, T | u32 S | f64 snr[S]
//   | f64 grid_start, grid_final | u64 seed
//   then J records: u32 id | f64 doas[K] | f32 input[3*M*M] | f32 labels[Q*L]
// The input tensor is channel-major (real, imaginary, phase), row-major
// inside each channel.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepmusic/array_sim.hpp"
#include "deepmusic/grid.hpp"
#include "deepmusic/rng.hpp"

namespace dm {

inline constexpr int kInputChannels = 3;

/// M x M x 3 real view of a covariance matrix: real part, imaginary part,
/// principal-value phase in radians.
struct InputTensor {
  int size = 0;
  std::vector<double> data;  // [channel][row][col]

  double at(int channel, int row, int col) const {
    return data[(static_cast<std::size_t>(channel) * size + row) * size + col];
  }
  std::vector<float> to_float() const { return {data.begin(), data.end()}; }
};

InputTensor build_input_tensor(const CovMatrix& r);

/// Noiseless MUSIC spectrum on the full grid, divided by its sum. For a
/// rank-deficient Gamma the covariance is forward-backward smoothed with
/// subarray size M - K first.
std::vector<double> normalized_label_spectrum(std::span<const double> doas_deg, const Partition& partition,
                                              const ArrayConfig& cfg, const CMatrix& gamma);

/// The normalized spectrum sliced into Q vectors of length L. At most one
/// DOA may fall in each region.
std::vector<std::vector<double>> label_spectra(std::span<const double> doas_deg, const Partition& partition,
                                               const ArrayConfig& cfg, const CMatrix& gamma);

/// K distinct regions chosen uniformly, then one continuous angle per region
/// kept guard_steps grid steps away from the region edges. Sorted ascending.
std::vector<double> draw_region_doas(Philox& rng, const Partition& partition, int num_sources,
                                     int guard_steps);

struct DatasetConfig {
  int j_alpha = 100;
  int j_beta = 100;
  int num_snapshots = 500;
  std::vector<double> snr_train_db{15.0, 20.0, 25.0, 30.0};
  int num_sources = 5;
  int num_regions = 8;
  AngularGrid grid{-60.0, 60.0, 4096};
  std::uint64_t seed = 1;
  int guard_steps = 2;

  std::size_t total_samples() const {
    return snr_train_db.size() * static_cast<std::size_t>(j_alpha) * static_cast<std::size_t>(j_beta);
  }
  void validate() const;
};

struct DatasetHeader {
  std::uint32_t num_elements = 0;  // M
  std::uint32_t num_points = 0;    // N
  std::uint32_t num_regions = 0;   // Q
  std::uint32_t region_len = 0;    // L
  std::uint32_t num_sources = 0;   // K
  std::uint32_t num_samples = 0;   // J
  std::uint32_t num_snapshots = 0; // T
  std::vector<double> snr_db;
  double grid_start = 0.0;
  double grid_final = 0.0;
  std::uint64_t seed = 0;

  std::size_t input_len() const { return static_cast<std::size_t>(kInputChannels) * num_elements * num_elements; }
  std::size_t labels_len() const { return static_cast<std::size_t>(num_regions) * region_len; }
  Partition partition() const;
  bool operator==(const DatasetHeader&) const = default;
};

struct Sample {
  std::uint32_t id = 0;
  std::vector<double> doas_deg;
  std::vector<float> input;   // 3*M*M
  std::vector<float> labels;  // Q*L, region-major

  std::span<const float> label(int region, int region_len) const {
    return std::span<const float>(labels).subspan(static_cast<std::size_t>(region) * region_len, region_len);
  }
  bool operator==(const Sample&) const = default;
};

/// One file holds the shared inputs and all Q label sets; D_q is the view
/// (input, label(q)) over the samples.
struct Dataset {
  DatasetHeader header;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  bool operator==(const Dataset&) const = default;
};

DatasetHeader dataset_header(const DatasetConfig& cfg, const ArrayConfig& array);

/// Training corpus: J_alpha DOA draws x J_beta noise realizations x SNRs.
/// Sample id mu = (alpha * J_beta + beta) * S + s. Pure in (cfg, seed).
Dataset generate_dataset(const DatasetConfig& cfg, const ArrayConfig& array, unsigned threads = 0);

/// Seeded shuffle, then the first round(train_fraction * J) samples train.
std::pair<Dataset, Dataset> split_train_val(const Dataset& data, double train_fraction, std::uint64_t seed);

std::vector<std::uint8_t> serialize_dataset(const Dataset& data);
Dataset deserialize_dataset(std::span<const std::uint8_t> bytes);
void save_dataset(const Dataset& data, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace dm
