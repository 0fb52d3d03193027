#pragma once

// Layer kernels for the DeepMUSIC network. Every kernel is a template over
// the storage scalar (float for training, double for gradient checks) and
// accumulates its reductions in double.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "deepmusic/nn/tensor.hpp"
#include "deepmusic/rng.hpp"

namespace dm::nn {

enum class LayerKind : std::uint8_t {
  Conv = 1,
  BatchNorm = 2,
  Relu = 3,
  FullyConnected = 4,
  Dropout = 5,
  Softmax = 6,
};

enum class Padding : std::uint8_t { Valid = 0, Same = 1 };

const char* to_string(LayerKind kind);

struct LayerSpec {
  LayerKind kind = LayerKind::Relu;
  int kernel = 0;    // conv: odd kernel side
  int channels = 0;  // conv: output channels; fc: output width
  Padding padding = Padding::Valid;
  double dropout = 0.0;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.1;

  static LayerSpec conv(int kernel, int channels, Padding padding = Padding::Valid) {
    return {LayerKind::Conv, kernel, channels, padding};
  }
  static LayerSpec batchnorm() { return {LayerKind::BatchNorm}; }
  static LayerSpec relu() { return {LayerKind::Relu}; }
  static LayerSpec fully_connected(int width) { return {LayerKind::FullyConnected, 0, width}; }
  static LayerSpec dropout_layer(double p) { return {LayerKind::Dropout, 0, 0, Padding::Valid, p}; }
  static LayerSpec softmax() { return {LayerKind::Softmax}; }

  void validate() const;
  Shape output_shape(const Shape& in) const;
  bool operator==(const LayerSpec&) const = default;
};

// ---- kernels -------------------------------------------------------------

/// Stride-1 cross-correlation. kernel is [k][k][c_in][c_out], bias [c_out].
template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& in, std::span<const T> kernel, std::span<const T> bias, int k,
                          int c_out, Padding padding);

template <typename T>
void conv2d_backward(const Tensor4<T>& in, std::span<const T> kernel, int k, int c_out, Padding padding,
                     const Tensor4<T>& grad_out, Tensor4<T>& grad_in, std::span<T> grad_kernel,
                     std::span<T> grad_bias);

/// y = W^T x + b over the flattened per-sample input; weight is [c_in][c_out].
template <typename T>
Tensor4<T> fc_forward(const Tensor4<T>& in, std::span<const T> weight, std::span<const T> bias, int c_out);

template <typename T>
void fc_backward(const Tensor4<T>& in, std::span<const T> weight, int c_out, const Tensor4<T>& grad_out,
                 Tensor4<T>& grad_in, std::span<T> grad_weight, std::span<T> grad_bias);

template <typename T>
struct BatchNormParams {
  std::span<const T> scale, shift;
  std::span<T> running_mean, running_var;
  double epsilon = 1e-5;
  double momentum = 0.1;
};

/// Per-channel statistics of the last forward call, reused by backward.
struct BatchNormCache {
  std::vector<double> mean, inv_std;
  Mode mode = Mode::Infer;
};

template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& in, BatchNormParams<T> params, Mode mode, BatchNormCache& cache);

template <typename T>
void batchnorm_backward(const Tensor4<T>& in, std::span<const T> scale, const BatchNormCache& cache,
                        const Tensor4<T>& grad_out, Tensor4<T>& grad_in, std::span<T> grad_scale,
                        std::span<T> grad_shift);

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& in);

template <typename T>
void relu_backward(const Tensor4<T>& in, const Tensor4<T>& grad_out, Tensor4<T>& grad_in);

/// Inverted dropout: survivors are scaled by 1/(1-p) in train mode; infer
/// mode is the identity. mask receives the per-unit scale factors.
template <typename T>
Tensor4<T> dropout_forward(const Tensor4<T>& in, double p, Mode mode, Philox& rng, std::vector<T>& mask);

template <typename T>
void dropout_backward(const std::vector<T>& mask, const Tensor4<T>& grad_out, Tensor4<T>& grad_in);

/// Softmax over the channel axis, max-subtracted.
template <typename T>
Tensor4<T> softmax_forward(const Tensor4<T>& in);

template <typename T>
void softmax_backward(const Tensor4<T>& out, const Tensor4<T>& grad_out, Tensor4<T>& grad_in);

struct LossResult {
  double loss = 0.0;
  std::vector<double> grad;
};

/// (1/L) sum (pred - target)^2 and its gradient (2/L)(pred - target).
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

// ---- layers --------------------------------------------------------------

template <typename T>
struct Param {
  std::string name;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;  // false for batchnorm running statistics
};

template <typename T>
class Layer {
 public:
  explicit Layer(LayerSpec spec) : spec_(spec) {}
  virtual ~Layer() = default;

  const LayerSpec& spec() const { return spec_; }
  std::vector<Param<T>>& params() { return params_; }
  const std::vector<Param<T>>& params() const { return params_; }

  /// Allocates and initializes parameters for the given input shape.
  virtual void init(const Shape& in, Philox& rng) = 0;
  virtual void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode mode) = 0;
  /// Writes grad_in and overwrites the parameter gradients.
  virtual void backward(const Tensor4<T>& in, const Tensor4<T>& out, const Tensor4<T>& grad_out,
                        Tensor4<T>& grad_in) = 0;
  virtual void reseed(std::uint64_t /*seed*/, std::uint64_t /*stream*/) {}

 protected:
  LayerSpec spec_;
  std::vector<Param<T>> params_;
};

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec);

}  // namespace dm::nn
