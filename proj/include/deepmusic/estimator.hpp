#pragma once

// DeepMUSIC inference: Q subregion networks map one covariance tensor to the
// partitioned spectrum, and the K strongest regions give the DOAs.
//
// Model bundle file (little-endian):
//   "DMMB" | u16 version | u32 M | f64 spacing
//   | f64 grid_start, grid_final | u32 N, Q, L
//   then Q times: u64 byte length | embedded "DMNN" checkpoint

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "deepmusic/array_sim.hpp"
#include "deepmusic/datagen.hpp"
#include "deepmusic/grid.hpp"
#include "deepmusic/nn/checkpoint.hpp"

namespace dm {

struct NetConfig {
  int filters = 256;
  int fc_width = 1024;
  double dropout = 0.5;
  void validate() const;
};

class DeepMusicModel {
 public:
  DeepMusicModel(ArrayConfig array, Partition partition, std::vector<nn::Checkpoint> networks);

  const ArrayConfig& array() const { return array_; }
  const Partition& partition() const { return partition_; }
  const std::vector<nn::Checkpoint>& checkpoints() const { return checkpoints_; }
  int num_regions() const { return partition_.num_regions; }

  /// Standardized network q output for one input tensor (length L).
  std::vector<double> predict_subspectrum(int region, const InputTensor& x);
  /// Concatenation of the Q sub-spectra (length N).
  std::vector<double> predict_full_spectrum(const InputTensor& x);

 private:
  ArrayConfig array_;
  Partition partition_;
  std::vector<nn::Checkpoint> checkpoints_;
  std::vector<nn::Network<float>> networks_;
};

struct DoaEstimate {
  std::vector<double> angles_deg;
  std::vector<double> region_peaks;
  std::vector<int> regions;  // chosen regions, in angle order
  bool degraded = false;
};

/// Top-K regions by peak value (ties to the lower region index), argmax
/// grid angle within each, sorted ascending.
DoaEstimate select_doas(const std::vector<double>& spectrum, const Partition& partition, int num_sources);

DoaEstimate estimate_doas(DeepMusicModel& model, const CovMatrix& r, int num_sources);

/// Channel-major float input (3 x M x M) to one NHWC sample.
std::vector<float> to_nhwc(std::span<const float> chw, int side);

/// Inputs (NHWC, standardized) and region-q labels of a dataset.
nn::Examples region_examples(const Dataset& data, int region, const nn::InputStats& stats);

/// Per-channel statistics over all inputs of a dataset.
nn::InputStats dataset_input_stats(const Dataset& data);

using RegionEpochCallback = std::function<void(int region, const nn::EpochRecord&)>;

/// Trains Q networks; network q uses seed substream(cfg.seed, q) and
/// they run on up to `threads` workers.
DeepMusicModel train_model(const Dataset& train, const Dataset& val, const ArrayConfig& array, const NetConfig& net,
                           const nn::TrainConfig& cfg, unsigned threads = 0, const RegionEpochCallback& on_epoch = {});

std::vector<std::uint8_t> serialize_model(const DeepMusicModel& model);
DeepMusicModel deserialize_model(std::span<const std::uint8_t> bytes);
void save_model(const DeepMusicModel& model, const std::string& path);
DeepMusicModel load_model(const std::string& path);

}  // namespace dm
