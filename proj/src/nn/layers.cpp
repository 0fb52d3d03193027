#include "deepmusic/nn/layers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepmusic/error.hpp"

namespace dm::nn {

const char* to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Conv: return "conv";
    case LayerKind::BatchNorm: return "batchnorm";
    case LayerKind::Relu: return "relu";
    case LayerKind::FullyConnected: return "fullyconnected";
    case LayerKind::Dropout: return "dropout";
    case LayerKind::Softmax: return "softmax";
  }
  return "unknown";
}

void LayerSpec::validate() const {
  switch (kind) {
    case LayerKind::Conv:
      require(kernel >= 1 && kernel % 2 == 1, "conv kernel size must be odd and >= 1");
      require(channels >= 1, "conv needs at least one output channel");
      break;
    case LayerKind::FullyConnected:
      require(channels >= 1, "fully connected width must be positive");
      break;
    case LayerKind::Dropout:
      require(dropout >= 0.0 && dropout < 1.0, "dropout probability must lie in [0, 1)");
      break;
    case LayerKind::BatchNorm:
      require(bn_epsilon > 0.0 && bn_momentum >= 0.0 && bn_momentum <= 1.0, "invalid batchnorm settings");
      break;
    case LayerKind::Relu:
    case LayerKind::Softmax:
      break;
    default:
      fail(ErrorCode::InvalidArgument, "unknown layer kind");
  }
}

Shape LayerSpec::output_shape(const Shape& in) const {
  validate();
  switch (kind) {
    case LayerKind::Conv: {
      if (padding == Padding::Same) return {in.n, in.h, in.w, channels};
      require(kernel <= in.h && kernel <= in.w,
              "conv kernel " + std::to_string(kernel) + " larger than input " + std::to_string(in.h) + "x" +
                  std::to_string(in.w));
      return {in.n, in.h - kernel + 1, in.w - kernel + 1, channels};
    }
    case LayerKind::FullyConnected:
      return {in.n, 1, 1, channels};
    default:
      return in;
  }
}

namespace {

int pad_of(int k, Padding padding) { return padding == Padding::Same ? (k - 1) / 2 : 0; }

template <typename T>
void store(std::span<T> dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = static_cast<T>(src[i]);
}

}  // namespace

// ---- convolution -----------------------------------------------------------

template <typename T>
Tensor4<T> conv2d_forward(const Tensor4<T>& in, std::span<const T> kernel, std::span<const T> bias, int k,
                          int c_out, Padding padding) {
  const LayerSpec spec = LayerSpec::conv(k, c_out, padding);
  const Shape os = spec.output_shape(in.shape);
  const int c_in = in.shape.c;
  require(kernel.size() == static_cast<std::size_t>(k) * k * c_in * c_out, "conv kernel shape mismatch");
  require(bias.size() == static_cast<std::size_t>(c_out), "conv bias shape mismatch");
  const int pad = pad_of(k, padding);

  Tensor4<T> out(os);
  std::vector<double> acc(c_out);
  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        for (int co = 0; co < c_out; ++co) acc[co] = bias[co];
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= in.shape.h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox + kx - pad;
            if (ix < 0 || ix >= in.shape.w) continue;
            const T* src = &in.at(n, iy, ix, 0);
            const T* wbase = kernel.data() + static_cast<std::size_t>(ky * k + kx) * c_in * c_out;
            for (int ci = 0; ci < c_in; ++ci) {
              const double v = src[ci];
              if (v == 0.0) continue;
              const T* w = wbase + static_cast<std::size_t>(ci) * c_out;
              for (int co = 0; co < c_out; ++co) acc[co] += v * static_cast<double>(w[co]);
            }
          }
        }
        T* dst = &out.at(n, oy, ox, 0);
        for (int co = 0; co < c_out; ++co) dst[co] = static_cast<T>(acc[co]);
      }
    }
  }
  return out;
}

template <typename T>
void conv2d_backward(const Tensor4<T>& in, std::span<const T> kernel, int k, int c_out, Padding padding,
                     const Tensor4<T>& grad_out, Tensor4<T>& grad_in, std::span<T> grad_kernel,
                     std::span<T> grad_bias) {
  const int c_in = in.shape.c;
  const Shape& os = grad_out.shape;
  const int pad = pad_of(k, padding);
  std::vector<double> gin(in.shape.size(), 0.0);
  std::vector<double> gk(kernel.size(), 0.0);
  std::vector<double> gb(c_out, 0.0);
  std::vector<double> g(c_out);

  for (int n = 0; n < os.n; ++n) {
    for (int oy = 0; oy < os.h; ++oy) {
      for (int ox = 0; ox < os.w; ++ox) {
        const T* go = &grad_out.at(n, oy, ox, 0);
        for (int co = 0; co < c_out; ++co) {
          g[co] = go[co];
          gb[co] += g[co];
        }
        for (int ky = 0; ky < k; ++ky) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= in.shape.h) continue;
          for (int kx = 0; kx < k; ++kx) {
            const int ix = ox + kx - pad;
            if (ix < 0 || ix >= in.shape.w) continue;
            const std::size_t in_base = in.index(n, iy, ix, 0);
            const std::size_t w_base = static_cast<std::size_t>(ky * k + kx) * c_in * c_out;
            for (int ci = 0; ci < c_in; ++ci) {
              const T* w = kernel.data() + w_base + static_cast<std::size_t>(ci) * c_out;
              double* gw = gk.data() + w_base + static_cast<std::size_t>(ci) * c_out;
              const double v = in.data[in_base + ci];
              double s = 0.0;
              for (int co = 0; co < c_out; ++co) {
                s += static_cast<double>(w[co]) * g[co];
                gw[co] += v * g[co];
              }
              gin[in_base + ci] += s;
            }
          }
        }
      }
    }
  }
  grad_in.resize(in.shape);
  store<T>(grad_in.data, gin);
  store(grad_kernel, gk);
  store(grad_bias, gb);
}

// ---- fully connected -------------------------------------------------------

template <typename T>
Tensor4<T> fc_forward(const Tensor4<T>& in, std::span<const T> weight, std::span<const T> bias, int c_out) {
  const std::size_t c_in = in.shape.per_sample();
  require(weight.size() == c_in * c_out, "fully connected weight shape mismatch");
  require(bias.size() == static_cast<std::size_t>(c_out), "fully connected bias shape mismatch");
  Tensor4<T> out(Shape{in.shape.n, 1, 1, c_out});
  std::vector<double> acc(c_out);
  for (int n = 0; n < in.shape.n; ++n) {
    const T* x = in.sample(n);
    for (int co = 0; co < c_out; ++co) acc[co] = bias[co];
    for (std::size_t i = 0; i < c_in; ++i) {
      const double v = x[i];
      if (v == 0.0) continue;
      const T* w = weight.data() + i * c_out;
      for (int co = 0; co < c_out; ++co) acc[co] += v * static_cast<double>(w[co]);
    }
    T* y = out.sample(n);
    for (int co = 0; co < c_out; ++co) y[co] = static_cast<T>(acc[co]);
  }
  return out;
}

template <typename T>
void fc_backward(const Tensor4<T>& in, std::span<const T> weight, int c_out, const Tensor4<T>& grad_out,
                 Tensor4<T>& grad_in, std::span<T> grad_weight, std::span<T> grad_bias) {
  const std::size_t c_in = in.shape.per_sample();
  std::vector<double> gw(weight.size(), 0.0), gb(c_out, 0.0), g(c_out);
  grad_in.resize(in.shape);
  for (int n = 0; n < in.shape.n; ++n) {
    const T* x = in.sample(n);
    const T* go = grad_out.sample(n);
    for (int co = 0; co < c_out; ++co) {
      g[co] = go[co];
      gb[co] += g[co];
    }
    T* gx = grad_in.sample(n);
    for (std::size_t i = 0; i < c_in; ++i) {
      const T* w = weight.data() + i * c_out;
      double* gwr = gw.data() + i * c_out;
      const double v = x[i];
      double s = 0.0;
      for (int co = 0; co < c_out; ++co) {
        s += static_cast<double>(w[co]) * g[co];
        gwr[co] += v * g[co];
      }
      gx[i] = static_cast<T>(s);
    }
  }
  store(grad_weight, gw);
  store(grad_bias, gb);
}

// ---- batch normalization ---------------------------------------------------

template <typename T>
Tensor4<T> batchnorm_forward(const Tensor4<T>& in, BatchNormParams<T> p, Mode mode, BatchNormCache& cache) {
  const int c = in.shape.c;
  require(p.scale.size() == static_cast<std::size_t>(c) && p.shift.size() == static_cast<std::size_t>(c),
          "batchnorm parameter shape mismatch");
  const std::size_t count = in.shape.size() / static_cast<std::size_t>(c);
  cache.mode = mode;
  cache.mean.assign(c, 0.0);
  cache.inv_std.assign(c, 0.0);
  if (mode == Mode::Train) {
    require(in.shape.n >= 2, "batchnorm needs a batch of at least 2 in train mode");
    std::vector<double> sum(c, 0.0), sq(c, 0.0);
    for (std::size_t i = 0; i < count; ++i)
      for (int ch = 0; ch < c; ++ch) sum[ch] += in.data[i * c + ch];
    for (int ch = 0; ch < c; ++ch) cache.mean[ch] = sum[ch] / static_cast<double>(count);
    for (std::size_t i = 0; i < count; ++i)
      for (int ch = 0; ch < c; ++ch) {
        const double d = in.data[i * c + ch] - cache.mean[ch];
        sq[ch] += d * d;
      }
    for (int ch = 0; ch < c; ++ch) {
      const double var = sq[ch] / static_cast<double>(count);
      cache.inv_std[ch] = 1.0 / std::sqrt(var + p.epsilon);
      p.running_mean[ch] = static_cast<T>((1.0 - p.momentum) * p.running_mean[ch] + p.momentum * cache.mean[ch]);
      p.running_var[ch] = static_cast<T>((1.0 - p.momentum) * p.running_var[ch] + p.momentum * var);
    }
  } else {
    for (int ch = 0; ch < c; ++ch) {
      cache.mean[ch] = p.running_mean[ch];
      cache.inv_std[ch] = 1.0 / std::sqrt(static_cast<double>(p.running_var[ch]) + p.epsilon);
    }
  }
  Tensor4<T> out(in.shape);
  for (std::size_t i = 0; i < count; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const double xhat = (in.data[i * c + ch] - cache.mean[ch]) * cache.inv_std[ch];
      out.data[i * c + ch] = static_cast<T>(static_cast<double>(p.scale[ch]) * xhat + p.shift[ch]);
    }
  return out;
}

template <typename T>
void batchnorm_backward(const Tensor4<T>& in, std::span<const T> scale, const BatchNormCache& cache,
                        const Tensor4<T>& grad_out, Tensor4<T>& grad_in, std::span<T> grad_scale,
                        std::span<T> grad_shift) {
  const int c = in.shape.c;
  const std::size_t count = in.shape.size() / static_cast<std::size_t>(c);
  std::vector<double> sum_g(c, 0.0), sum_gx(c, 0.0);
  for (std::size_t i = 0; i < count; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const double g = grad_out.data[i * c + ch];
      const double xhat = (in.data[i * c + ch] - cache.mean[ch]) * cache.inv_std[ch];
      sum_g[ch] += g;
      sum_gx[ch] += g * xhat;
    }
  grad_in.resize(in.shape);
  const double m = static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i)
    for (int ch = 0; ch < c; ++ch) {
      const double g = grad_out.data[i * c + ch];
      const double k = static_cast<double>(scale[ch]) * cache.inv_std[ch];
      if (cache.mode == Mode::Train) {
        const double xhat = (in.data[i * c + ch] - cache.mean[ch]) * cache.inv_std[ch];
        grad_in.data[i * c + ch] = static_cast<T>(k * (g - sum_g[ch] / m - xhat * sum_gx[ch] / m));
      } else {
        grad_in.data[i * c + ch] = static_cast<T>(k * g);
      }
    }
  store(grad_scale, sum_gx);
  store(grad_shift, sum_g);
}

// ---- pointwise -------------------------------------------------------------

template <typename T>
Tensor4<T> relu_forward(const Tensor4<T>& in) {
  Tensor4<T> out(in.shape);
  for (std::size_t i = 0; i < in.data.size(); ++i) out.data[i] = in.data[i] > T(0) ? in.data[i] : T(0);
  return out;
}

template <typename T>
void relu_backward(const Tensor4<T>& in, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) {
  grad_in.resize(in.shape);
  for (std::size_t i = 0; i < in.data.size(); ++i) grad_in.data[i] = in.data[i] > T(0) ? grad_out.data[i] : T(0);
}

template <typename T>
Tensor4<T> dropout_forward(const Tensor4<T>& in, double p, Mode mode, Philox& rng, std::vector<T>& mask) {
  require(p >= 0.0 && p < 1.0, "dropout probability must lie in [0, 1)");
  if (mode == Mode::Infer || p == 0.0) {
    mask.assign(in.data.size(), T(1));
    return in;
  }
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  mask.resize(in.data.size());
  Tensor4<T> out(in.shape);
  for (std::size_t i = 0; i < in.data.size(); ++i) {
    mask[i] = rng.uniform() < p ? T(0) : keep_scale;
    out.data[i] = in.data[i] * mask[i];
  }
  return out;
}

template <typename T>
void dropout_backward(const std::vector<T>& mask, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) {
  grad_in.resize(grad_out.shape);
  for (std::size_t i = 0; i < grad_out.data.size(); ++i) grad_in.data[i] = grad_out.data[i] * mask[i];
}

template <typename T>
Tensor4<T> softmax_forward(const Tensor4<T>& in) {
  const int c = in.shape.c;
  const std::size_t rows = in.shape.size() / static_cast<std::size_t>(c);
  Tensor4<T> out(in.shape);
  std::vector<double> e(c);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* x = in.data.data() + r * c;
    double mx = x[0];
    for (int i = 1; i < c; ++i) mx = std::max(mx, static_cast<double>(x[i]));
    double sum = 0.0;
    for (int i = 0; i < c; ++i) sum += (e[i] = std::exp(static_cast<double>(x[i]) - mx));
    for (int i = 0; i < c; ++i) out.data[r * c + i] = static_cast<T>(e[i] / sum);
  }
  return out;
}

template <typename T>
void softmax_backward(const Tensor4<T>& out, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) {
  const int c = out.shape.c;
  const std::size_t rows = out.shape.size() / static_cast<std::size_t>(c);
  grad_in.resize(out.shape);
  for (std::size_t r = 0; r < rows; ++r) {
    double dot = 0.0;
    for (int i = 0; i < c; ++i)
      dot += static_cast<double>(grad_out.data[r * c + i]) * static_cast<double>(out.data[r * c + i]);
    for (int i = 0; i < c; ++i)
      grad_in.data[r * c + i] =
          static_cast<T>(static_cast<double>(out.data[r * c + i]) * (grad_out.data[r * c + i] - dot));
  }
}

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  require(pred.size() == target.size() && !pred.empty(), "loss needs equal, nonempty lengths");
  const double l = static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    r.loss += d * d;
    r.grad[i] = 2.0 * d / l;
  }
  r.loss /= l;
  return r;
}

// ---- layer objects ---------------------------------------------------------

namespace {

template <typename T>
void init_uniform(std::vector<T>& w, std::size_t fan_in, Philox& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (T& v : w) v = static_cast<T>(rng.uniform(-bound, bound));
}

template <typename T>
std::span<const T> cview(const std::vector<T>& v) {
  return {v.data(), v.size()};
}

template <typename T>
class ConvLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void init(const Shape& in, Philox& rng) override {
    const auto& s = this->spec_;
    const std::size_t fan_in = static_cast<std::size_t>(s.kernel) * s.kernel * in.c;
    this->params_ = {{"weight", std::vector<T>(fan_in * s.channels), {}, true},
                     {"bias", std::vector<T>(s.channels, T(0)), {}, true}};
    init_uniform(this->params_[0].value, fan_in, rng);
  }
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode) override {
    const auto& s = this->spec_;
    out = conv2d_forward<T>(in, cview(this->params_[0].value), cview(this->params_[1].value), s.kernel,
                            s.channels, s.padding);
  }
  void backward(const Tensor4<T>& in, const Tensor4<T>&, const Tensor4<T>& grad_out,
                Tensor4<T>& grad_in) override {
    const auto& s = this->spec_;
    auto& p = this->params_;
    p[0].grad.resize(p[0].value.size());
    p[1].grad.resize(p[1].value.size());
    conv2d_backward<T>(in, cview(p[0].value), s.kernel, s.channels, s.padding, grad_out, grad_in, p[0].grad,
                       p[1].grad);
  }
};

template <typename T>
class FullyConnectedLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void init(const Shape& in, Philox& rng) override {
    const std::size_t fan_in = in.per_sample();
    const int width = this->spec_.channels;
    this->params_ = {{"weight", std::vector<T>(fan_in * width), {}, true},
                     {"bias", std::vector<T>(width, T(0)), {}, true}};
    init_uniform(this->params_[0].value, fan_in, rng);
  }
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode) override {
    out = fc_forward<T>(in, cview(this->params_[0].value), cview(this->params_[1].value), this->spec_.channels);
  }
  void backward(const Tensor4<T>& in, const Tensor4<T>&, const Tensor4<T>& grad_out,
                Tensor4<T>& grad_in) override {
    auto& p = this->params_;
    p[0].grad.resize(p[0].value.size());
    p[1].grad.resize(p[1].value.size());
    fc_backward<T>(in, cview(p[0].value), this->spec_.channels, grad_out, grad_in, p[0].grad, p[1].grad);
  }
};

template <typename T>
class BatchNormLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;

  void init(const Shape& in, Philox&) override {
    this->params_ = {{"scale", std::vector<T>(in.c, T(1)), {}, true},
                     {"shift", std::vector<T>(in.c, T(0)), {}, true},
                     {"running_mean", std::vector<T>(in.c, T(0)), {}, false},
                     {"running_var", std::vector<T>(in.c, T(1)), {}, false}};
  }
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode mode) override {
    auto& p = this->params_;
    BatchNormParams<T> bp{cview(p[0].value), cview(p[1].value), p[2].value, p[3].value, this->spec_.bn_epsilon,
                          this->spec_.bn_momentum};
    out = batchnorm_forward<T>(in, bp, mode, cache_);
  }
  void backward(const Tensor4<T>& in, const Tensor4<T>&, const Tensor4<T>& grad_out,
                Tensor4<T>& grad_in) override {
    auto& p = this->params_;
    p[0].grad.resize(p[0].value.size());
    p[1].grad.resize(p[1].value.size());
    batchnorm_backward<T>(in, cview(p[0].value), cache_, grad_out, grad_in, p[0].grad, p[1].grad);
  }

 private:
  BatchNormCache cache_;
};

template <typename T>
class ReluLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  void init(const Shape&, Philox&) override {}
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode) override { out = relu_forward(in); }
  void backward(const Tensor4<T>& in, const Tensor4<T>&, const Tensor4<T>& grad_out,
                Tensor4<T>& grad_in) override {
    relu_backward(in, grad_out, grad_in);
  }
};

template <typename T>
class DropoutLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  void init(const Shape&, Philox&) override {}
  void reseed(std::uint64_t seed, std::uint64_t stream) override { rng_ = Philox(seed, stream); }
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode mode) override {
    out = dropout_forward(in, this->spec_.dropout, mode, rng_, mask_);
  }
  void backward(const Tensor4<T>&, const Tensor4<T>&, const Tensor4<T>& grad_out, Tensor4<T>& grad_in) override {
    dropout_backward(mask_, grad_out, grad_in);
  }

 private:
  Philox rng_{0};
  std::vector<T> mask_;
};

template <typename T>
class SoftmaxLayer final : public Layer<T> {
 public:
  using Layer<T>::Layer;
  void init(const Shape&, Philox&) override {}
  void forward(const Tensor4<T>& in, Tensor4<T>& out, Mode) override { out = softmax_forward(in); }
  void backward(const Tensor4<T>&, const Tensor4<T>& out, const Tensor4<T>& grad_out,
                Tensor4<T>& grad_in) override {
    softmax_backward(out, grad_out, grad_in);
  }
};

}  // namespace

template <typename T>
std::unique_ptr<Layer<T>> make_layer(const LayerSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case LayerKind::Conv: return std::make_unique<ConvLayer<T>>(spec);
    case LayerKind::BatchNorm: return std::make_unique<BatchNormLayer<T>>(spec);
    case LayerKind::Relu: return std::make_unique<ReluLayer<T>>(spec);
    case LayerKind::FullyConnected: return std::make_unique<FullyConnectedLayer<T>>(spec);
    case LayerKind::Dropout: return std::make_unique<DropoutLayer<T>>(spec);
    case LayerKind::Softmax: return std::make_unique<SoftmaxLayer<T>>(spec);
  }
  fail(ErrorCode::InvalidArgument, "unknown layer kind");
}

#define DM_INSTANTIATE(T)                                                                                      \
  template Tensor4<T> conv2d_forward<T>(const Tensor4<T>&, std::span<const T>, std::span<const T>, int, int,  \
                                        Padding);                                                              \
  template void conv2d_backward<T>(const Tensor4<T>&, std::span<const T>, int, int, Padding, const Tensor4<T>&, \
                                   Tensor4<T>&, std::span<T>, std::span<T>);                                   \
  template Tensor4<T> fc_forward<T>(const Tensor4<T>&, std::span<const T>, std::span<const T>, int);           \
  template void fc_backward<T>(const Tensor4<T>&, std::span<const T>, int, const Tensor4<T>&, Tensor4<T>&,      \
                               std::span<T>, std::span<T>);                                                    \
  template Tensor4<T> batchnorm_forward<T>(const Tensor4<T>&, BatchNormParams<T>, Mode, BatchNormCache&);      \
  template void batchnorm_backward<T>(const Tensor4<T>&, std::span<const T>, const BatchNormCache&,            \
                                      const Tensor4<T>&, Tensor4<T>&, std::span<T>, std::span<T>);             \
  template Tensor4<T> relu_forward<T>(const Tensor4<T>&);                                                       \
  template void relu_backward<T>(const Tensor4<T>&, const Tensor4<T>&, Tensor4<T>&);                           \
  template Tensor4<T> dropout_forward<T>(const Tensor4<T>&, double, Mode, Philox&, std::vector<T>&);           \
  template void dropout_backward<T>(const std::vector<T>&, const Tensor4<T>&, Tensor4<T>&);                    \
  template Tensor4<T> softmax_forward<T>(const Tensor4<T>&);                                                    \
  template void softmax_backward<T>(const Tensor4<T>&, const Tensor4<T>&, Tensor4<T>&);                        \
  template std::unique_ptr<Layer<T>> make_layer<T>(const LayerSpec&);

DM_INSTANTIATE(float)
DM_INSTANTIATE(double)

#undef DM_INSTANTIATE

}  // namespace dm::nn
