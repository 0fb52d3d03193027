#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "deepmusic/nn/network.hpp"

namespace dm::nn {

struct TrainConfig {
  double learning_rate = 0.01;
  double momentum = 0.9;
  int batch_size = 128;
  double lr_drop_factor = 0.5;
  int lr_drop_period = 10;
  int patience = 3;
  int max_epochs = 100;
  std::uint64_t seed = 1;

  /// Learning rate in effect during 1-based epoch e.
  double lr_at(int epoch) const;
  void validate() const;
};

struct EpochRecord {
  std::uint32_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double learning_rate = 0.0;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  std::uint32_t best_epoch = 0;
  bool operator==(const TrainLog&) const = default;
};

/// Stops after `patience` consecutive epochs without an improvement of at
/// least min_delta over the best validation loss so far.
class EarlyStopper {
 public:
  explicit EarlyStopper(int patience, double min_delta = 1e-6) : patience_(patience), min_delta_(min_delta) {}

  /// Records the loss of 1-based epoch; returns true when training should stop.
  bool update(int epoch, double val_loss);
  int best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }
  bool improved() const { return improved_; }

 private:
  int patience_;
  double min_delta_;
  double best_ = 0.0;
  int best_epoch_ = 0;
  int stale_ = 0;
  bool improved_ = false;
};

/// Classical momentum: v = momentum * v - lr * g, p = p + v.
template <typename T>
void sgd_momentum_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, double lr,
                       double momentum);

/// Supervised pairs: count inputs of the network's per-sample NHWC shape,
/// each with a target of target_len values.
struct Examples {
  std::size_t count = 0;
  std::vector<float> inputs;
  std::vector<float> targets;
  std::size_t target_len = 0;

  std::span<const float> input(std::size_t i, std::size_t per_sample) const {
    return std::span<const float>(inputs).subspan(i * per_sample, per_sample);
  }
  std::span<const float> target(std::size_t i) const {
    return std::span<const float>(targets).subspan(i * target_len, target_len);
  }
};

/// Mean per-sample MSE of the network in infer mode.
double evaluate_loss(Network<float>& net, const Examples& data, int batch_size = 256);

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch SGD with the step LR schedule and early stopping on the
/// validation loss. On return net holds the parameters of the best epoch.
TrainLog train_network(Network<float>& net, const Examples& train, const Examples& val, const TrainConfig& cfg,
                       const EpochCallback& on_epoch = {});

}  // namespace dm::nn
