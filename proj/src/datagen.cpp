#include "deepmusic/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "deepmusic/binary_io.hpp"
#include "deepmusic/error.hpp"
#include "deepmusic/parallel.hpp"
#include "deepmusic/subspace.hpp"

namespace dm {

namespace {

constexpr char kDatasetMagic[] = "DMDS";
constexpr std::uint16_t kDatasetVersion = 1;
constexpr double kLabelEigenThreshold = 1e-10;

}  // namespace

InputTensor build_input_tensor(const CovMatrix& r) {
  const int m = r.size();
  require(m >= 1 && r.data.cols() == m, "covariance must be square");
  InputTensor x;
  x.size = m;
  x.data.resize(static_cast<std::size_t>(kInputChannels) * m * m);
  const std::size_t plane = static_cast<std::size_t>(m) * m;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      const cdouble v = r.data(i, j);
      const std::size_t k = static_cast<std::size_t>(i) * m + j;
      x.data[k] = v.real();
      x.data[plane + k] = v.imag();
      // std::arg(0) is +0 and arg of (-x, +0) is +pi, matching the (-pi, pi] convention.
      x.data[2 * plane + k] = v == cdouble(0.0) ? 0.0 : std::arg(cdouble(v.real(), v.imag() + 0.0));
    }
  }
  return x;
}

std::vector<double> normalized_label_spectrum(std::span<const double> doas_deg, const Partition& partition,
                                              const ArrayConfig& cfg, const CMatrix& gamma) {
  cfg.validate();
  const int k = static_cast<int>(doas_deg.size());
  require(k >= 1, "labels need at least one DOA");
  require(gamma.rows() == k && gamma.cols() == k, "Gamma must be K x K");
  require(k < cfg.num_elements, "labels need K < M");

  std::vector<int> seen(partition.num_regions, 0);
  for (double doa : doas_deg) {
    const int q = partition.region_of_angle(doa);
    require(q >= 0, "DOA " + std::to_string(doa) + " outside the grid");
    require(++seen[q] == 1, "two DOAs in region " + std::to_string(q));
  }

  SourceConfig src;
  src.doas_deg.assign(doas_deg.begin(), doas_deg.end());
  src.signal_covariance = gamma;
  src.noise_variance = 0.0;
  CovMatrix r = ideal_covariance(src, cfg);
  ArrayConfig scan = cfg;
  if (psd_factor(gamma).cols() < k) {
    const int sub = cfg.num_elements - k;
    r = forward_backward_smooth(r, sub);
    scan.num_elements = sub;
  }
  const EigenBasis basis = eigendecompose_thresholded(r, kLabelEigenThreshold);
  Spectrum s = music_spectrum(basis, partition.grid, scan);
  const double total = std::accumulate(s.values.begin(), s.values.end(), 0.0);
  for (double& v : s.values) v /= total;
  return std::move(s.values);
}

std::vector<std::vector<double>> label_spectra(std::span<const double> doas_deg, const Partition& partition,
                                               const ArrayConfig& cfg, const CMatrix& gamma) {
  const std::vector<double> full = normalized_label_spectrum(doas_deg, partition, cfg, gamma);
  std::vector<std::vector<double>> out(partition.num_regions);
  for (int q = 0; q < partition.num_regions; ++q) {
    const auto first = full.begin() + partition.first_index(q);
    out[q].assign(first, first + partition.region_len);
  }
  return out;
}

std::vector<double> draw_region_doas(Philox& rng, const Partition& partition, int num_sources,
                                     int guard_steps) {
  require(num_sources >= 1 && num_sources <= partition.num_regions, "need 1 <= K <= Q");
  const double guard = guard_steps * partition.grid.resolution_deg();
  std::vector<int> regions(partition.num_regions);
  std::iota(regions.begin(), regions.end(), 0);
  // Partial Fisher-Yates: the first K entries are a uniform K-subset.
  for (int i = 0; i < num_sources; ++i) {
    const auto j = i + static_cast<int>(rng.below(partition.num_regions - i));
    std::swap(regions[i], regions[j]);
  }
  std::vector<double> doas;
  for (int i = 0; i < num_sources; ++i) {
    const auto [lo, hi] = partition.region_bounds[regions[i]];
    require(hi - lo > 2.0 * guard, "region narrower than the edge guard");
    doas.push_back(rng.uniform(lo + guard, hi - guard));
  }
  std::sort(doas.begin(), doas.end());
  return doas;
}

void DatasetConfig::validate() const {
  require(j_alpha >= 1 && j_beta >= 1, "J_alpha and J_beta must be positive");
  require(num_snapshots >= 1, "T must be positive");
  require(!snr_train_db.empty(), "need at least one training SNR");
  require(num_sources >= 1 && num_sources <= num_regions, "need 1 <= K <= Q");
  require(total_samples() <= 0xFFFFFFFFull, "dataset too large for u32 sample ids");
  (void)partition_grid(grid, num_regions);
}

Partition DatasetHeader::partition() const {
  return partition_grid(make_grid(grid_start, grid_final, static_cast<int>(num_points)),
                        static_cast<int>(num_regions));
}

DatasetHeader dataset_header(const DatasetConfig& cfg, const ArrayConfig& array) {
  cfg.validate();
  array.validate();
  DatasetHeader h;
  h.num_elements = static_cast<std::uint32_t>(array.num_elements);
  h.num_points = static_cast<std::uint32_t>(cfg.grid.num_points);
  h.num_regions = static_cast<std::uint32_t>(cfg.num_regions);
  h.region_len = static_cast<std::uint32_t>(cfg.grid.num_points / cfg.num_regions);
  h.num_sources = static_cast<std::uint32_t>(cfg.num_sources);
  h.num_samples = static_cast<std::uint32_t>(cfg.total_samples());
  h.num_snapshots = static_cast<std::uint32_t>(cfg.num_snapshots);
  h.snr_db = cfg.snr_train_db;
  h.grid_start = cfg.grid.start_deg;
  h.grid_final = cfg.grid.final_deg;
  h.seed = cfg.seed;
  return h;
}

Dataset generate_dataset(const DatasetConfig& cfg, const ArrayConfig& array, unsigned threads) {
  Dataset out;
  out.header = dataset_header(cfg, array);
  const Partition partition = partition_grid(cfg.grid, cfg.num_regions);
  const std::size_t per_alpha = cfg.snr_train_db.size() * static_cast<std::size_t>(cfg.j_beta);
  out.samples.resize(cfg.total_samples());

  parallel_for(
      static_cast<std::size_t>(cfg.j_alpha),
      [&](std::size_t alpha) {
        Philox rng(cfg.seed, alpha);
        const std::vector<double> doas = draw_region_doas(rng, partition, cfg.num_sources, cfg.guard_steps);
        const CMatrix gamma = CMatrix::Identity(cfg.num_sources, cfg.num_sources);
        const std::vector<double> spectrum = normalized_label_spectrum(doas, partition, array, gamma);
        const std::vector<float> labels(spectrum.begin(), spectrum.end());

        std::size_t mu = alpha * per_alpha;
        for (int beta = 0; beta < cfg.j_beta; ++beta) {
          for (double snr : cfg.snr_train_db) {
            SourceConfig src;
            src.doas_deg = doas;
            src.signal_covariance = gamma;
            src.noise_variance = noise_variance_for_snr(snr);
            const CovMatrix r = sample_covariance(simulate_snapshots(src, array, cfg.num_snapshots, rng));
            Sample& s = out.samples[mu];
            s.id = static_cast<std::uint32_t>(mu);
            s.doas_deg = doas;
            s.input = build_input_tensor(r).to_float();
            s.labels = labels;
            ++mu;
          }
        }
      },
      threads);
  return out;
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& data, double train_fraction, std::uint64_t seed) {
  require(!data.samples.empty(), "cannot split an empty dataset");
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must lie in (0, 1)");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Philox rng(seed, 0x5EED5EEDull);
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
  const auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));

  std::pair<Dataset, Dataset> out;
  out.first.header = data.header;
  out.second.header = data.header;
  for (std::size_t i = 0; i < n; ++i)
    (i < n_train ? out.first : out.second).samples.push_back(data.samples[order[i]]);
  out.first.header.num_samples = static_cast<std::uint32_t>(out.first.size());
  out.second.header.num_samples = static_cast<std::uint32_t>(out.second.size());
  return out;
}

std::vector<std::uint8_t> serialize_dataset(const Dataset& data) {
  const DatasetHeader& h = data.header;
  require(h.num_samples == data.size(), "header sample count does not match payload");
  io::Writer w;
  w.put_magic(kDatasetMagic);
  w.put<std::uint16_t>(kDatasetVersion);
  for (std::uint32_t v : {h.num_elements, h.num_points, h.num_regions, h.region_len, h.num_sources,
                          h.num_samples, h.num_snapshots})
    w.put(v);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(h.snr_db.size()));
  w.put_array<double>(h.snr_db);
  w.put(h.grid_start);
  w.put(h.grid_final);
  w.put(h.seed);
  for (const Sample& s : data.samples) {
    require(s.doas_deg.size() == h.num_sources && s.input.size() == h.input_len() &&
                s.labels.size() == h.labels_len(),
            "sample " + std::to_string(s.id) + " does not match the header shape");
    w.put(s.id);
    w.put_array<double>(s.doas_deg);
    w.put_array<float>(s.input);
    w.put_array<float>(s.labels);
  }
  return w.take();
}

Dataset deserialize_dataset(std::span<const std::uint8_t> bytes) {
  io::Reader r(bytes, "dataset");
  r.expect_magic(kDatasetMagic);
  r.expect_version(kDatasetVersion);
  Dataset d;
  DatasetHeader& h = d.header;
  h.num_elements = static_cast<std::uint32_t>(r.get_count(4096, "M"));
  h.num_points = static_cast<std::uint32_t>(r.get_count(1u << 24, "N"));
  h.num_regions = static_cast<std::uint32_t>(r.get_count(1u << 24, "Q"));
  h.region_len = static_cast<std::uint32_t>(r.get_count(1u << 24, "L"));
  h.num_sources = static_cast<std::uint32_t>(r.get_count(4096, "K"));
  h.num_samples = r.get<std::uint32_t>();
  h.num_snapshots = r.get<std::uint32_t>();
  h.snr_db.resize(r.get_count(1u << 16, "SNR count"));
  r.get_array<double>(h.snr_db);
  h.grid_start = r.get<double>();
  h.grid_final = r.get<double>();
  h.seed = r.get<std::uint64_t>();
  if (h.num_elements < 2 || h.num_regions == 0 ||
      static_cast<std::uint64_t>(h.num_regions) * h.region_len != h.num_points ||
      !(h.grid_start < h.grid_final))
    fail(ErrorCode::Format, "dataset: inconsistent header");

  const std::size_t record = 4 + 8 * h.num_sources + 4 * (h.input_len() + h.labels_len());
  if (r.remaining() < record * static_cast<std::size_t>(h.num_samples))
    fail(ErrorCode::Truncated, "dataset: truncated payload (" + std::to_string(r.remaining()) + " bytes for " +
                                   std::to_string(h.num_samples) + " records)");
  d.samples.resize(h.num_samples);
  for (Sample& s : d.samples) {
    s.id = r.get<std::uint32_t>();
    s.doas_deg.resize(h.num_sources);
    r.get_array<double>(s.doas_deg);
    s.input.resize(h.input_len());
    r.get_array<float>(s.input);
    s.labels.resize(h.labels_len());
    r.get_array<float>(s.labels);
  }
  if (!r.at_end()) fail(ErrorCode::Format, "dataset: trailing bytes after last record");
  return d;
}

void save_dataset(const Dataset& data, const std::string& path) {
  io::write_file(path, serialize_dataset(data));
}

Dataset load_dataset(const std::string& path) { return deserialize_dataset(io::read_file(path)); }

}  // namespace dm
