#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "deepmusic/nn/layers.hpp"

namespace dm::nn {

/// Layer chain of one DeepMUSIC subregion network for an M x M x 3 input:
/// four conv/batchnorm/relu stages (kernels 5, 5, 3, 3), fc(fc_width),
/// dropout, fc(L), softmax.
std::vector<LayerSpec> deepmusic_layers(int input_side, int region_len, int num_filters, int fc_width = 1024,
                                        double dropout = 0.5, Padding padding = Padding::Valid);

/// Shape after each layer; throws if the chain does not fit the input.
std::vector<Shape> chain_shapes(const Shape& input, const std::vector<LayerSpec>& specs);

/// Per-channel standardization of NHWC inputs.
struct InputStats {
  std::vector<double> mean;
  std::vector<double> stddev;

  static InputStats identity(int channels);
  /// Statistics over count samples of per_sample NHWC values each.
  static InputStats compute(std::span<const float> nhwc, std::size_t count, int channels);
  void apply(std::span<float> nhwc) const;
  bool operator==(const InputStats&) const = default;
};

template <typename T>
class Network {
 public:
  Network(Shape input, std::vector<LayerSpec> specs);

  const Shape& input_shape() const { return input_; }
  const std::vector<LayerSpec>& specs() const { return specs_; }
  std::size_t output_len() const { return shapes_.back().per_sample(); }
  std::size_t num_layers() const { return layers_.size(); }
  Layer<T>& layer(std::size_t i) { return *layers_[i]; }
  const Layer<T>& layer(std::size_t i) const { return *layers_[i]; }

  /// Fresh parameters from (seed); dropout masks are drawn from substreams
  /// of the same seed.
  void init(std::uint64_t seed);
  /// Points each dropout layer at stream (seed, substream(stream, layer)).
  void reseed(std::uint64_t seed, std::uint64_t stream);

  /// Runs the chain and keeps every activation for backward.
  const Tensor4<T>& forward(const Tensor4<T>& input, Mode mode);
  /// Backpropagates grad_output through the last forward call and fills
  /// every parameter gradient.
  void backward(const Tensor4<T>& grad_output);

  std::vector<Param<T>*> parameters();
  std::vector<const Param<T>*> parameters() const;

 private:
  Shape input_;
  std::vector<LayerSpec> specs_;
  std::vector<Shape> shapes_;
  std::vector<std::unique_ptr<Layer<T>>> layers_;
  std::vector<Tensor4<T>> acts_;  // acts_[0] input, acts_[i + 1] output of layer i
  Tensor4<T> grad_a_, grad_b_;
};

extern template class Network<float>;
extern template class Network<double>;

}  // namespace dm::nn
