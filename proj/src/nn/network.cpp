#include "deepmusic/nn/network.hpp"

#include <cmath>
#include <string>

#include "deepmusic/error.hpp"

namespace dm::nn {

std::vector<LayerSpec> deepmusic_layers(int input_side, int region_len, int num_filters, int fc_width,
                                        double dropout, Padding padding) {
  require(num_filters >= 1 && fc_width >= 1 && region_len >= 1, "network widths must be positive");
  if (padding == Padding::Valid)
    require(input_side >= 13, "input side " + std::to_string(input_side) +
                                  " is too small for four valid convolutions (need >= 13)");
  std::vector<LayerSpec> specs;
  for (int k : {5, 5, 3, 3}) {
    specs.push_back(LayerSpec::conv(k, num_filters, padding));
    specs.push_back(LayerSpec::batchnorm());
    specs.push_back(LayerSpec::relu());
  }
  specs.push_back(LayerSpec::fully_connected(fc_width));
  specs.push_back(LayerSpec::dropout_layer(dropout));
  specs.push_back(LayerSpec::fully_connected(region_len));
  specs.push_back(LayerSpec::softmax());
  return specs;
}

std::vector<Shape> chain_shapes(const Shape& input, const std::vector<LayerSpec>& specs) {
  require(input.h >= 1 && input.w >= 1 && input.c >= 1, "network input shape must be positive");
  std::vector<Shape> shapes{input};
  for (const auto& s : specs) shapes.push_back(s.output_shape(shapes.back()));
  return shapes;
}

InputStats InputStats::identity(int channels) {
  return {std::vector<double>(channels, 0.0), std::vector<double>(channels, 1.0)};
}

InputStats InputStats::compute(std::span<const float> nhwc, std::size_t count, int channels) {
  require(count > 0 && channels > 0 && nhwc.size() % channels == 0, "input statistics need data");
  InputStats s{std::vector<double>(channels, 0.0), std::vector<double>(channels, 0.0)};
  const std::size_t rows = nhwc.size() / channels;
  for (std::size_t i = 0; i < rows; ++i)
    for (int c = 0; c < channels; ++c) s.mean[c] += nhwc[i * channels + c];
  for (auto& m : s.mean) m /= static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (int c = 0; c < channels; ++c) {
      const double d = nhwc[i * channels + c] - s.mean[c];
      s.stddev[c] += d * d;
    }
  for (auto& v : s.stddev) {
    v = std::sqrt(v / static_cast<double>(rows));
    if (!(v > 1e-12)) v = 1.0;
  }
  return s;
}

void InputStats::apply(std::span<float> nhwc) const {
  const std::size_t c = mean.size();
  for (std::size_t i = 0; i < nhwc.size(); ++i) {
    const std::size_t ch = i % c;
    nhwc[i] = static_cast<float>((nhwc[i] - mean[ch]) / stddev[ch]);
  }
}

template <typename T>
Network<T>::Network(Shape input, std::vector<LayerSpec> specs)
    : input_(input.with_batch(1)), specs_(std::move(specs)) {
  require(!specs_.empty(), "network needs at least one layer");
  shapes_ = chain_shapes(input_, specs_);
  for (const auto& s : specs_) layers_.push_back(make_layer<T>(s));
  Philox rng(0);
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->init(shapes_[i], rng);
}

template <typename T>
void Network<T>::init(std::uint64_t seed) {
  Philox rng(seed, 0);
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->init(shapes_[i], rng);
  reseed(seed, 1);
}

template <typename T>
void Network<T>::reseed(std::uint64_t seed, std::uint64_t stream) {
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->reseed(seed, substream(stream, i));
}

template <typename T>
const Tensor4<T>& Network<T>::forward(const Tensor4<T>& input, Mode mode) {
  const Shape& s = input.shape;
  require(s.h == input_.h && s.w == input_.w && s.c == input_.c && s.n >= 1,
          "network input shape mismatch");
  acts_.resize(layers_.size() + 1);
  acts_[0] = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) layers_[i]->forward(acts_[i], acts_[i + 1], mode);
  return acts_.back();
}

template <typename T>
void Network<T>::backward(const Tensor4<T>& grad_output) {
  require(acts_.size() == layers_.size() + 1, "backward called before forward");
  require(grad_output.shape == acts_.back().shape, "output gradient shape mismatch");
  const Tensor4<T>* g = &grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    Tensor4<T>& dst = (g == &grad_a_) ? grad_b_ : grad_a_;
    layers_[i]->backward(acts_[i], acts_[i + 1], *g, dst);
    g = &dst;
  }
}

template <typename T>
std::vector<Param<T>*> Network<T>::parameters() {
  std::vector<Param<T>*> out;
  for (auto& l : layers_)
    for (auto& p : l->params()) out.push_back(&p);
  return out;
}

template <typename T>
std::vector<const Param<T>*> Network<T>::parameters() const {
  std::vector<const Param<T>*> out;
  for (const auto& l : layers_)
    for (const auto& p : l->params()) out.push_back(&p);
  return out;
}

template class Network<float>;
template class Network<double>;

}  // namespace dm::nn
