#include "deepmusic/nn/checkpoint.hpp"

#include <cmath>

#include "deepmusic/binary_io.hpp"

namespace dm::nn {

namespace {

constexpr std::uint16_t kVersion = 1;
constexpr std::uint64_t kMaxLayers = 1024;
constexpr std::uint64_t kMaxSide = 1 << 16;
constexpr std::uint64_t kMaxEpochs = 1 << 20;

Error malformed(const io::Reader& r, const std::string& msg) { return Error(ErrorCode::Format, r.what() + ": " + msg); }

}  // namespace

Checkpoint Checkpoint::capture(const Network<float>& net, InputStats stats, TrainLog log) {
  Checkpoint c{net.input_shape(), net.specs(), std::move(stats), {}, std::move(log)};
  for (const auto* p : net.parameters()) c.params.push_back(p->value);
  return c;
}

Network<float> Checkpoint::restore() const {
  Network<float> net(input, specs);
  auto ps = net.parameters();
  require(ps.size() == params.size(), "checkpoint parameter count does not match its layer manifest");
  for (std::size_t i = 0; i < ps.size(); ++i) {
    require(ps[i]->value.size() == params[i].size(),
            "checkpoint parameter " + std::to_string(i) + " has the wrong length");
    ps[i]->value = params[i];
  }
  return net;
}

std::vector<std::uint8_t> serialize_checkpoint(const Checkpoint& c) {
  io::Writer w;
  w.put_magic("DMNN");
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint32_t>(c.input.h);
  w.put<std::uint32_t>(c.input.w);
  w.put<std::uint32_t>(c.input.c);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.specs.size()));
  for (const auto& s : c.specs) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.kind));
    w.put<std::uint32_t>(s.kernel);
    w.put<std::uint32_t>(s.channels);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(s.padding));
    w.put<double>(s.dropout);
    w.put<double>(s.bn_epsilon);
    w.put<double>(s.bn_momentum);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.stats.mean.size()));
  w.put_array<double>(c.stats.mean);
  w.put_array<double>(c.stats.stddev);
  for (const auto& p : c.params) {
    w.put<std::uint64_t>(p.size());
    w.put_array<float>(p);
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.log.epochs.size()));
  for (const auto& e : c.log.epochs) {
    w.put<std::uint32_t>(e.epoch);
    w.put<double>(e.train_loss);
    w.put<double>(e.val_loss);
    w.put<double>(e.learning_rate);
  }
  w.put<std::uint32_t>(c.log.best_epoch);
  return w.take();
}

Checkpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "checkpoint");
  r.expect_magic("DMNN");
  r.expect_version(kVersion);
  Checkpoint c;
  c.input.n = 1;
  c.input.h = static_cast<int>(r.get_count(kMaxSide, "input height"));
  c.input.w = static_cast<int>(r.get_count(kMaxSide, "input width"));
  c.input.c = static_cast<int>(r.get_count(kMaxSide, "input channels"));
  const auto layers = r.get_count(kMaxLayers, "layer count");
  for (std::uint64_t i = 0; i < layers; ++i) {
    LayerSpec s;
    const auto kind = r.get<std::uint8_t>();
    if (kind < 1 || kind > 6) throw malformed(r, "unknown layer kind " + std::to_string(kind));
    s.kind = static_cast<LayerKind>(kind);
    s.kernel = static_cast<int>(r.get_count(kMaxSide, "kernel size"));
    s.channels = static_cast<int>(r.get_count(kMaxSide, "channel count"));
    const auto pad = r.get<std::uint8_t>();
    if (pad > 1) throw malformed(r, "unknown padding mode " + std::to_string(pad));
    s.padding = static_cast<Padding>(pad);
    s.dropout = r.get<double>();
    s.bn_epsilon = r.get<double>();
    s.bn_momentum = r.get<double>();
    c.specs.push_back(s);
  }
  const auto channels = r.get_count(kMaxSide, "statistics channel count");
  if (channels != static_cast<std::uint64_t>(c.input.c)) throw malformed(r, "statistics do not match input channels");
  c.stats.mean.resize(channels);
  c.stats.stddev.resize(channels);
  r.get_array<double>(c.stats.mean);
  r.get_array<double>(c.stats.stddev);
  for (double s : c.stats.stddev)
    if (!(s > 0.0) || !std::isfinite(s)) throw malformed(r, "nonpositive input standard deviation");

  // Validate the manifest before trusting any blob lengths.
  std::vector<std::size_t> expected;
  try {
    const auto shapes = chain_shapes(c.input, c.specs);
    double total = 0.0;
    for (std::size_t i = 0; i < c.specs.size(); ++i) {
      const auto& s = c.specs[i];
      if (s.kind == LayerKind::Conv) total += double(s.kernel) * s.kernel * shapes[i].c * s.channels;
      if (s.kind == LayerKind::FullyConnected) total += double(shapes[i].per_sample()) * s.channels;
      total += double(shapes[i + 1].per_sample());
    }
    if (total > double(1ull << 28)) throw malformed(r, "implausibly large network");
    Network<float> probe(c.input, c.specs);
    for (const auto* p : probe.parameters()) expected.push_back(p->value.size());
  } catch (const Error& e) {
    throw malformed(r, std::string("inconsistent layer manifest: ") + e.what());
  }
  for (std::size_t i = 0; i < expected.size(); ++i) {
    const auto n = r.get<std::uint64_t>();
    if (n != expected[i]) throw malformed(r, "parameter " + std::to_string(i) + " has the wrong length");
    std::vector<float> v(n);
    r.get_array<float>(v);
    c.params.push_back(std::move(v));
  }
  const auto epochs = r.get_count(kMaxEpochs, "epoch count");
  for (std::uint64_t i = 0; i < epochs; ++i) {
    EpochRecord e;
    e.epoch = r.get<std::uint32_t>();
    e.train_loss = r.get<double>();
    e.val_loss = r.get<double>();
    e.learning_rate = r.get<double>();
    c.log.epochs.push_back(e);
  }
  c.log.best_epoch = r.get<std::uint32_t>();
  if (!r.at_end()) throw malformed(r, "trailing bytes after training log");
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::string& path) { return deserialize_checkpoint(io::read_file(path)); }

}  // namespace dm::nn
