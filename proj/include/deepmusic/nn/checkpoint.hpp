#pragma once

// Network checkpoint file (little-endian):
//   "DMNN" | u16 version | u32 h, w, c | u32 layer count
//   | per layer: u8 kind, u32 kernel, u32 channels, u8 padding,
//     f64 dropout, f64 bn_epsilon, f64 bn_momentum
//   | u32 channels | f64 mean[c] | f64 stddev[c]
//   | per parameter in layer order: u64 count | f32 values[count]
//   | u32 epoch count | per epoch: u32 epoch, f64 train, f64 val, f64 lr
//   | u32 best epoch

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "deepmusic/nn/network.hpp"
#include "deepmusic/nn/trainer.hpp"

namespace dm::nn {

struct Checkpoint {
  Shape input;
  std::vector<LayerSpec> specs;
  InputStats stats;
  std::vector<std::vector<float>> params;
  TrainLog log;

  static Checkpoint capture(const Network<float>& net, InputStats stats, TrainLog log);
  /// Rebuilds the network and loads the stored parameters.
  Network<float> restore() const;
  bool operator==(const Checkpoint&) const = default;
};

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dm::nn
