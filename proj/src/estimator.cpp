#include "deepmusic/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepmusic/binary_io.hpp"
#include "deepmusic/error.hpp"
#include "deepmusic/parallel.hpp"

namespace dm {

namespace {

constexpr std::uint16_t kVersion = 1;

nn::Shape input_shape(int side) { return {1, side, side, kInputChannels}; }

}  // namespace

void NetConfig::validate() const {
  require(filters >= 1, "net.filters must be >= 1");
  require(fc_width >= 1, "net.fc_width must be >= 1");
  require(dropout >= 0.0 && dropout < 1.0, "net.dropout must lie in [0, 1)");
}

DeepMusicModel::DeepMusicModel(ArrayConfig array, Partition partition, std::vector<nn::Checkpoint> networks)
    : array_(array), partition_(std::move(partition)), checkpoints_(std::move(networks)) {
  array_.validate();
  require(static_cast<int>(checkpoints_.size()) == partition_.num_regions,
          "model needs one network per region (" + std::to_string(partition_.num_regions) + "), got " +
              std::to_string(checkpoints_.size()));
  for (const auto& c : checkpoints_) {
    require(c.input == input_shape(array_.num_elements), "network input shape does not match the array size");
    networks_.push_back(c.restore());
    require(networks_.back().output_len() == static_cast<std::size_t>(partition_.region_len),
            "network output length does not match the region length");
  }
}

std::vector<double> DeepMusicModel::predict_subspectrum(int region, const InputTensor& x) {
  require(region >= 0 && region < num_regions(), "region index " + std::to_string(region) + " out of range");
  require(x.size == array_.num_elements, "input tensor size does not match the array");
  auto sample = to_nhwc(x.to_float(), x.size);
  checkpoints_[region].stats.apply(sample);
  nn::Tensor4<float> in(input_shape(x.size));
  in.data = std::move(sample);
  const auto& out = networks_[region].forward(in, nn::Mode::Infer);
  return {out.data.begin(), out.data.end()};
}

std::vector<double> DeepMusicModel::predict_full_spectrum(const InputTensor& x) {
  std::vector<double> full;
  full.reserve(static_cast<std::size_t>(partition_.num_regions) * partition_.region_len);
  for (int q = 0; q < num_regions(); ++q) {
    const auto sub = predict_subspectrum(q, x);
    full.insert(full.end(), sub.begin(), sub.end());
  }
  return full;
}

DoaEstimate select_doas(const std::vector<double>& spectrum, const Partition& p, int num_sources) {
  require(num_sources >= 1 && num_sources <= p.num_regions,
          "K = " + std::to_string(num_sources) + " must lie in [1, Q = " + std::to_string(p.num_regions) + "]");
  require(spectrum.size() == static_cast<std::size_t>(p.num_regions) * p.region_len, "spectrum length mismatch");
  DoaEstimate est;
  std::vector<int> argmax(p.num_regions);
  for (int q = 0; q < p.num_regions; ++q) {
    const auto first = spectrum.begin() + p.first_index(q);
    const auto it = std::max_element(first, first + p.region_len);
    argmax[q] = static_cast<int>(it - spectrum.begin());
    est.region_peaks.push_back(*it);
    if (!std::isfinite(*it)) est.degraded = true;
  }
  std::vector<int> order(p.num_regions);
  std::iota(order.begin(), order.end(), 0);
  // NaN peaks rank last so the comparator stays a strict weak order.
  auto key = [&](int q) { return std::isnan(est.region_peaks[q]) ? -INFINITY : est.region_peaks[q]; };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key(a) > key(b); });
  est.regions.assign(order.begin(), order.begin() + num_sources);
  std::sort(est.regions.begin(), est.regions.end());
  for (int q : est.regions) est.angles_deg.push_back(p.grid.angle(argmax[q]));
  return est;
}

DoaEstimate estimate_doas(DeepMusicModel& model, const CovMatrix& r, int num_sources) {
  require(num_sources >= 1 && num_sources <= model.num_regions(),
          "K = " + std::to_string(num_sources) + " must lie in [1, Q = " + std::to_string(model.num_regions()) + "]");
  return select_doas(model.predict_full_spectrum(build_input_tensor(r)), model.partition(), num_sources);
}

std::vector<float> to_nhwc(std::span<const float> chw, int side) {
  const std::size_t plane = static_cast<std::size_t>(side) * side;
  require(chw.size() == plane * kInputChannels, "input tensor length mismatch");
  std::vector<float> out(chw.size());
  for (std::size_t k = 0; k < plane; ++k)
    for (int c = 0; c < kInputChannels; ++c) out[k * kInputChannels + c] = chw[c * plane + k];
  return out;
}

nn::InputStats dataset_input_stats(const Dataset& data) {
  require(!data.samples.empty(), "cannot compute input statistics of an empty dataset");
  const int m = static_cast<int>(data.header.num_elements);
  std::vector<float> all;
  all.reserve(data.size() * data.header.input_len());
  for (const auto& s : data.samples) {
    const auto v = to_nhwc(s.input, m);
    all.insert(all.end(), v.begin(), v.end());
  }
  return nn::InputStats::compute(all, data.size(), kInputChannels);
}

nn::Examples region_examples(const Dataset& data, int region, const nn::InputStats& stats) {
  const auto& h = data.header;
  require(region >= 0 && region < static_cast<int>(h.num_regions), "region index out of range");
  nn::Examples ex;
  ex.count = data.size();
  ex.target_len = h.region_len;
  ex.inputs.reserve(ex.count * h.input_len());
  ex.targets.reserve(ex.count * h.region_len);
  for (const auto& s : data.samples) {
    auto v = to_nhwc(s.input, static_cast<int>(h.num_elements));
    stats.apply(v);
    ex.inputs.insert(ex.inputs.end(), v.begin(), v.end());
    const auto lab = s.label(region, static_cast<int>(h.region_len));
    ex.targets.insert(ex.targets.end(), lab.begin(), lab.end());
  }
  return ex;
}

DeepMusicModel train_model(const Dataset& train, const Dataset& val, const ArrayConfig& array, const NetConfig& net,
                           const nn::TrainConfig& cfg, unsigned threads, const RegionEpochCallback& on_epoch) {
  net.validate();
  cfg.validate();
  array.validate();
  const auto& h = train.header;
  require(h.num_elements == static_cast<std::uint32_t>(array.num_elements),
          "dataset array size M = " + std::to_string(h.num_elements) + " does not match array.elements");
  auto vh = val.header;
  vh.num_samples = h.num_samples;
  require(vh == h, "training and validation headers differ");
  require(!train.samples.empty() && !val.samples.empty(), "training and validation sets must be nonempty");

  const int q_count = static_cast<int>(h.num_regions);
  const auto stats = dataset_input_stats(train);
  const auto specs = nn::deepmusic_layers(array.num_elements, static_cast<int>(h.region_len), net.filters,
                                          net.fc_width, net.dropout);
  std::vector<nn::Checkpoint> ckpts(q_count);
  std::mutex callback_mutex;
  parallel_for(
      q_count,
      [&](std::size_t q) {
        const int region = static_cast<int>(q);
        nn::Network<float> model(input_shape(array.num_elements), specs);
        nn::TrainConfig rc = cfg;
        rc.seed = substream(cfg.seed, q);
        model.init(rc.seed);
        const auto tr = region_examples(train, region, stats);
        const auto va = region_examples(val, region, stats);
        nn::EpochCallback cb;
        if (on_epoch)
          cb = [&](const nn::EpochRecord& r) {
            std::lock_guard lock(callback_mutex);
            on_epoch(region, r);
          };
        auto log = nn::train_network(model, tr, va, rc, cb);
        ckpts[q] = nn::Checkpoint::capture(model, stats, std::move(log));
      },
      threads);
  return DeepMusicModel(array, h.partition(), std::move(ckpts));
}

std::vector<std::uint8_t> serialize_model(const DeepMusicModel& model) {
  io::Writer w;
  w.put_magic("DMMB");
  w.put<std::uint16_t>(kVersion);
  w.put<std::uint32_t>(model.array().num_elements);
  w.put<double>(model.array().spacing_wavelengths);
  const auto& p = model.partition();
  w.put<double>(p.grid.start_deg);
  w.put<double>(p.grid.final_deg);
  w.put<std::uint32_t>(p.grid.num_points);
  w.put<std::uint32_t>(p.num_regions);
  w.put<std::uint32_t>(p.region_len);
  for (const auto& c : model.checkpoints()) {
    const auto bytes = nn::serialize_checkpoint(c);
    w.put<std::uint64_t>(bytes.size());
    w.put_bytes(bytes);
  }
  return w.take();
}

DeepMusicModel deserialize_model(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "model bundle");
  r.expect_magic("DMMB");
  r.expect_version(kVersion);
  ArrayConfig array;
  array.num_elements = static_cast<int>(r.get_count(1 << 12, "array elements"));
  array.spacing_wavelengths = r.get<double>();
  const double start = r.get<double>();
  const double final_deg = r.get<double>();
  const int n = static_cast<int>(r.get_count(1 << 24, "grid points"));
  const int q = static_cast<int>(r.get_count(1 << 16, "region count"));
  const int l = static_cast<int>(r.get_count(1 << 24, "region length"));
  Partition partition;
  try {
    array.validate();
    partition = partition_grid(make_grid(start, final_deg, n), q);
  } catch (const Error& e) {
    fail(ErrorCode::Format, r.what() + ": invalid header: " + e.what());
  }
  if (partition.region_len != l) fail(ErrorCode::Format, r.what() + ": region length does not match N / Q");
  std::vector<nn::Checkpoint> ckpts;
  for (int i = 0; i < q; ++i) {
    const auto len = r.get<std::uint64_t>();
    if (len > r.remaining()) fail(ErrorCode::Truncated, r.what() + ": truncated network " + std::to_string(i));
    ckpts.push_back(nn::deserialize_checkpoint(r.get_bytes(len)));
  }
  if (!r.at_end()) fail(ErrorCode::Format, r.what() + ": trailing bytes after the last network");
  try {
    return DeepMusicModel(array, std::move(partition), std::move(ckpts));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    fail(ErrorCode::Format, r.what() + ": " + e.what());
  }
}

void save_model(const DeepMusicModel& model, const std::string& path) { io::write_file(path, serialize_model(model)); }

DeepMusicModel load_model(const std::string& path) { return deserialize_model(io::read_file(path)); }

}  // namespace dm
