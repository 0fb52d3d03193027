#include "deepmusic/nn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "deepmusic/error.hpp"

namespace dm::nn {

double TrainConfig::lr_at(int epoch) const {
  return learning_rate * std::pow(lr_drop_factor, (epoch - 1) / lr_drop_period);
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0 && std::isfinite(learning_rate), "learning rate must be finite and >= 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(batch_size >= 1, "batch size must be >= 1");
  require(lr_drop_factor > 0.0 && lr_drop_factor <= 1.0, "lr drop factor must lie in (0, 1]");
  require(lr_drop_period >= 1, "lr drop period must be >= 1");
  require(patience >= 1, "patience must be >= 1");
  require(max_epochs >= 1, "max epochs must be >= 1");
}

bool EarlyStopper::update(int epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss <= best_ - min_delta_;
  if (improved_) {
    best_ = val_loss;
    best_epoch_ = epoch;
    stale_ = 0;
    return false;
  }
  return ++stale_ >= patience_;
}

template <typename T>
void sgd_momentum_step(std::span<T> params, std::span<const T> grads, std::span<T> velocity, double lr,
                       double momentum) {
  require(params.size() == grads.size() && params.size() == velocity.size(), "optimizer size mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double v = momentum * velocity[i] - lr * grads[i];
    velocity[i] = static_cast<T>(v);
    params[i] = static_cast<T>(params[i] + velocity[i]);
  }
}

template void sgd_momentum_step<float>(std::span<float>, std::span<const float>, std::span<float>, double, double);
template void sgd_momentum_step<double>(std::span<double>, std::span<const double>, std::span<double>, double,
                                        double);

namespace {

void check_examples(const Network<float>& net, const Examples& data, const char* what) {
  const std::size_t per = net.input_shape().per_sample();
  require(data.count > 0, std::string(what) + " set is empty");
  require(data.inputs.size() == data.count * per, std::string(what) + " inputs do not match the network shape");
  require(data.target_len == net.output_len() && data.targets.size() == data.count * data.target_len,
          std::string(what) + " targets do not match the network output");
}

Tensor4<float> gather(const Network<float>& net, const Examples& data, std::span<const std::size_t> idx) {
  const std::size_t per = net.input_shape().per_sample();
  Tensor4<float> x(net.input_shape().with_batch(static_cast<int>(idx.size())));
  for (std::size_t b = 0; b < idx.size(); ++b) {
    auto src = data.input(idx[b], per);
    std::copy(src.begin(), src.end(), x.sample(static_cast<int>(b)));
  }
  return x;
}

/// Mean MSE over the batch; grad receives d(mean loss)/d(output) if given.
double batch_loss(const Tensor4<float>& out, const Examples& data, std::span<const std::size_t> idx,
                  Tensor4<float>* grad) {
  const std::size_t len = data.target_len;
  std::vector<double> pred(len), tgt(len);
  double total = 0.0;
  if (grad) grad->resize(out.shape);
  for (std::size_t b = 0; b < idx.size(); ++b) {
    const float* y = out.sample(static_cast<int>(b));
    auto t = data.target(idx[b]);
    for (std::size_t i = 0; i < len; ++i) {
      pred[i] = y[i];
      tgt[i] = t[i];
    }
    const LossResult r = mse_loss(pred, tgt);
    total += r.loss;
    if (grad) {
      float* g = grad->sample(static_cast<int>(b));
      for (std::size_t i = 0; i < len; ++i) g[i] = static_cast<float>(r.grad[i] / static_cast<double>(idx.size()));
    }
  }
  return total;
}

std::vector<std::vector<float>> snapshot(Network<float>& net) {
  std::vector<std::vector<float>> out;
  for (auto* p : net.parameters()) out.push_back(p->value);
  return out;
}

void restore(Network<float>& net, const std::vector<std::vector<float>>& values) {
  auto params = net.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value = values[i];
}

}  // namespace

double evaluate_loss(Network<float>& net, const Examples& data, int batch_size) {
  check_examples(net, data, "evaluation");
  std::vector<std::size_t> idx(data.count);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  double total = 0.0;
  for (std::size_t start = 0; start < data.count; start += batch_size) {
    const std::size_t n = std::min<std::size_t>(batch_size, data.count - start);
    std::span<const std::size_t> part(idx.data() + start, n);
    const auto& out = net.forward(gather(net, data, part), Mode::Infer);
    total += batch_loss(out, data, part, nullptr);
  }
  return total / static_cast<double>(data.count);
}

TrainLog train_network(Network<float>& net, const Examples& train, const Examples& val, const TrainConfig& cfg,
                       const EpochCallback& on_epoch) {
  cfg.validate();
  check_examples(net, train, "training");
  check_examples(net, val, "validation");
  require(train.count >= 2, "training needs at least 2 samples for batch normalization");

  auto params = net.parameters();
  std::vector<std::vector<float>> velocity;
  for (auto* p : params) velocity.emplace_back(p->value.size(), 0.0f);

  std::vector<std::size_t> order(train.count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  EarlyStopper stopper(cfg.patience);
  std::vector<std::vector<float>> best = snapshot(net);
  TrainLog log;
  Tensor4<float> grad;

  net.reseed(cfg.seed, 1);
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    Philox shuffle_rng(cfg.seed, substream(2, epoch));
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    // A trailing batch of one sample cannot be batch-normalized, so it joins
    // the batch before it.
    std::vector<std::pair<std::size_t, std::size_t>> batches;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size)
      batches.emplace_back(start, std::min<std::size_t>(cfg.batch_size, order.size() - start));
    if (batches.size() > 1 && batches.back().second == 1) {
      batches[batches.size() - 2].second += 1;
      batches.pop_back();
    }

    const double lr = cfg.lr_at(epoch);
    double train_total = 0.0;
    for (const auto& [start, n] : batches) {
      std::span<const std::size_t> idx(order.data() + start, n);
      const auto& out = net.forward(gather(net, train, idx), Mode::Train);
      train_total += batch_loss(out, train, idx, &grad);
      net.backward(grad);
      for (std::size_t p = 0; p < params.size(); ++p) {
        if (!params[p]->trainable) continue;
        sgd_momentum_step<float>(params[p]->value, params[p]->grad, velocity[p], lr, cfg.momentum);
      }
    }

    EpochRecord rec{static_cast<std::uint32_t>(epoch), train_total / static_cast<double>(train.count),
                    evaluate_loss(net, val), lr};
    log.epochs.push_back(rec);
    const bool stop = stopper.update(epoch, rec.val_loss);
    if (stopper.improved()) best = snapshot(net);
    if (on_epoch) on_epoch(rec);
    if (stop) break;
  }
  log.best_epoch = static_cast<std::uint32_t>(stopper.best_epoch());
  restore(net, best);
  return log;
}

}  // namespace dm::nn
