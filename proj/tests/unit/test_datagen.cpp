#include <gtest/gtest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <numeric>

#include "../support/oracles.hpp"
#include "deepmusic/binary_io.hpp"
#include "deepmusic/datagen.hpp"
#include "deepmusic/error.hpp"

namespace dm {
namespace {

const ArrayConfig kUla16{16, 0.5};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dm_test_" + name)).string();
}

TEST(Grid, DefaultResolution) {
  const AngularGrid g = make_grid(-60.0, 60.0, 4096);
  EXPECT_DOUBLE_EQ(g.resolution_deg(), 120.0 / 4096.0);
  EXPECT_NEAR(g.resolution_deg(), 0.029297, 1e-6);
}

TEST(Grid, HalfOpenLayout) {
  const AngularGrid g = make_grid(-60.0, 60.0, 120);
  EXPECT_EQ(g.resolution_deg(), 1.0);
  EXPECT_EQ(g.angle(0), -60.0);
  EXPECT_EQ(g.angle(119), 59.0);
  const AngularGrid small = make_grid(0.0, 1.0, 4);
  EXPECT_EQ(small.angle(1), 0.25);
  EXPECT_EQ(small.angle(3), 0.75);
  EXPECT_THROW(make_grid(0.0, 1.0, 0), Error);
  EXPECT_THROW(make_grid(1.0, 0.0, 4), Error);
}

TEST(Grid, IndexAngleInverse) {
  const AngularGrid g = make_grid(-60.0, 60.0, 4096);
  for (int i = 0; i < g.num_points; ++i) ASSERT_EQ(g.nearest_index(g.angle(i)), i);
}

TEST(Partition, DefaultSplit) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 4096), 8);
  EXPECT_EQ(p.region_len, 512);
  EXPECT_EQ(p.region_bounds[0].first, -60.0);
  EXPECT_EQ(p.region_bounds[0].second, -45.0);
  for (int q = 0; q + 1 < 8; ++q) EXPECT_EQ(p.region_bounds[q].second, p.region_bounds[q + 1].first);
  EXPECT_EQ(p.region_bounds[7].second, 60.0);
}

TEST(Partition, SingleRegionAndSmallCase) {
  const AngularGrid g = make_grid(0.0, 8.0, 8);
  const Partition one = partition_grid(g, 1);
  EXPECT_EQ(one.region_len, 8);
  const Partition four = partition_grid(g, 4);
  for (int q = 0; q < 4; ++q) {
    EXPECT_EQ(four.first_index(q), 2 * q);
    EXPECT_EQ(four.region_of_index(2 * q + 1), q);
  }
  EXPECT_THROW(partition_grid(g, 3), Error);
}

TEST(InputTensor, Identity) {
  const InputTensor x = build_input_tensor(CovMatrix{CMatrix::Identity(4, 4)});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      EXPECT_EQ(x.at(0, i, j), i == j ? 1.0 : 0.0);
      EXPECT_EQ(x.at(1, i, j), 0.0);
      EXPECT_EQ(x.at(2, i, j), 0.0);
    }
}

TEST(InputTensor, PureImaginaryEntry) {
  CMatrix r = CMatrix::Identity(3, 3);
  r(0, 1) = cdouble(0.0, 1.0);
  r(1, 0) = cdouble(0.0, -1.0);
  const InputTensor x = build_input_tensor(CovMatrix{r});
  EXPECT_EQ(x.at(0, 0, 1), 0.0);
  EXPECT_EQ(x.at(1, 0, 1), 1.0);
  EXPECT_DOUBLE_EQ(x.at(2, 0, 1), std::numbers::pi / 2);
}

TEST(InputTensor, InvariantsOnRandomHermitian) {
  Philox rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix r(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) r(i, j) = rng.complex_normal();
    r = (r + r.adjoint()).eval();
    r(0, 1) = cdouble(-1.0, 0.0);
    r(1, 0) = cdouble(-1.0, -0.0);
    const InputTensor x = build_input_tensor(CovMatrix{r});
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        EXPECT_EQ(cdouble(x.at(0, i, j), x.at(1, i, j)), r(i, j));
        EXPECT_EQ(x.at(0, i, j), x.at(0, j, i));
        EXPECT_EQ(x.at(1, i, j), -x.at(1, j, i));
        EXPECT_GT(x.at(2, i, j), -std::numbers::pi);
        EXPECT_LE(x.at(2, i, j), std::numbers::pi);
      }
  }
}

TEST(Labels, SingleSourcePeaksInItsRegion) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 512), 8);
  const int idx = 3 * 64 + 20;
  const double doa = p.grid.angle(idx);
  const auto labels = label_spectra(std::vector<double>{doa}, p, kUla16, CMatrix::Identity(1, 1));
  ASSERT_EQ(labels.size(), 8u);
  const double peak3 = *std::max_element(labels[3].begin(), labels[3].end());
  EXPECT_EQ(std::max_element(labels[3].begin(), labels[3].end()) - labels[3].begin(), 20);
  for (int q = 0; q < 8; ++q) {
    EXPECT_EQ(labels[q].size(), 64u);
    if (q != 3) {
      EXPECT_LT(*std::max_element(labels[q].begin(), labels[q].end()), peak3);
    }
    for (double v : labels[q]) EXPECT_GE(v, 0.0);
  }
}

TEST(Labels, ConcatenationIsNormalizedSpectrum) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 512), 8);
  const std::vector<double> doas{-33.1, 4.7};
  const auto full = normalized_label_spectrum(doas, p, kUla16, CMatrix::Identity(2, 2));
  const auto labels = label_spectra(doas, p, kUla16, CMatrix::Identity(2, 2));
  std::vector<double> cat;
  for (const auto& l : labels) cat.insert(cat.end(), l.begin(), l.end());
  EXPECT_EQ(cat, full);
  EXPECT_NEAR(std::accumulate(full.begin(), full.end(), 0.0), 1.0, 1e-9);
}

TEST(Labels, FiveOnGridSourcesMatchOracle) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 4096), 8);
  const std::vector<int> regions{0, 2, 3, 5, 7};
  const std::vector<int> offsets{100, 256, 17, 490, 300};
  std::vector<double> doas;
  for (int i = 0; i < 5; ++i) doas.push_back(p.grid.angle(p.first_index(regions[i]) + offsets[i]));
  const auto labels = label_spectra(doas, p, kUla16, CMatrix::Identity(5, 5));
  for (int i = 0; i < 5; ++i) {
    const auto& l = labels[regions[i]];
    EXPECT_EQ(std::max_element(l.begin(), l.end()) - l.begin(), offsets[i]);
  }
  // Brute-force oracle on the unnormalized spectrum, away from the peaks.
  const CMatrix r = oracle::covariance(doas, CMatrix::Identity(5, 5), 0.0, 16, 0.5);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(r);
  const CMatrix un = es.eigenvectors().leftCols(11);
  const auto full = normalized_label_spectrum(doas, p, kUla16, CMatrix::Identity(5, 5));
  const double ratio_ref = oracle::music_value(un, p.grid.angle(1000), 0.5) / oracle::music_value(un, p.grid.angle(2000), 0.5);
  EXPECT_NEAR(full[1000] / full[2000], ratio_ref, 1e-6 * ratio_ref);
}

TEST(Labels, RejectsTwoDoasInOneRegion) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 512), 8);
  EXPECT_THROW(label_spectra(std::vector<double>{-59.0, -50.0}, p, kUla16, CMatrix::Identity(2, 2)), Error);
}

TEST(Labels, CoherentPathUsesSmoothing) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 512), 8);
  const std::vector<double> doas{p.grid.angle(100), p.grid.angle(400)};
  const auto full = normalized_label_spectrum(doas, p, kUla16, correlated_pair_covariance(1, 1, 1));
  std::vector<int> idx(full.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + 2, idx.end(), [&](int a, int b) { return full[a] > full[b]; });
  std::sort(idx.begin(), idx.begin() + 2);
  EXPECT_EQ(idx[0], 100);
  EXPECT_EQ(idx[1], 400);
}

TEST(DrawRegionDoas, DistinctRegionsWithGuard) {
  const Partition p = partition_grid(make_grid(-60.0, 60.0, 512), 8);
  Philox rng(8);
  const double guard = 2 * p.grid.resolution_deg();
  for (int t = 0; t < 200; ++t) {
    const auto doas = draw_region_doas(rng, p, 5, 2);
    ASSERT_TRUE(std::is_sorted(doas.begin(), doas.end()));
    std::vector<int> seen;
    for (double d : doas) {
      const int q = p.region_of_angle(d);
      ASSERT_GE(q, 0);
      EXPECT_EQ(std::count(seen.begin(), seen.end(), q), 0);
      seen.push_back(q);
      EXPECT_GE(d, p.region_bounds[q].first + guard);
      EXPECT_LE(d, p.region_bounds[q].second - guard);
    }
  }
}

DatasetConfig small_config() {
  DatasetConfig cfg;
  cfg.j_alpha = 3;
  cfg.j_beta = 2;
  cfg.num_snapshots = 50;
  cfg.snr_train_db = {10.0, 30.0};
  cfg.num_sources = 2;
  cfg.num_regions = 8;
  cfg.grid = make_grid(-60.0, 60.0, 256);
  cfg.seed = 17;
  return cfg;
}

TEST(GenerateDataset, MinimalSize) {
  DatasetConfig cfg = small_config();
  cfg.j_alpha = 1;
  cfg.j_beta = 1;
  cfg.snr_train_db = {20.0};
  const Dataset d = generate_dataset(cfg, kUla16);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.header.num_samples, 1u);
}

TEST(GenerateDataset, FullScaleHeader) {
  DatasetConfig cfg;  // default corpus size
  cfg.num_sources = 5;
  const DatasetHeader h = dataset_header(cfg, kUla16);
  EXPECT_EQ(h.num_samples, 40000u);
  EXPECT_EQ(h.region_len, 512u);
}

TEST(GenerateDataset, SamplesSatisfyInvariants) {
  const DatasetConfig cfg = small_config();
  const Dataset d = generate_dataset(cfg, kUla16);
  ASSERT_EQ(d.size(), 12u);
  const Partition p = d.header.partition();
  for (std::size_t mu = 0; mu < d.size(); ++mu) {
    const Sample& s = d.samples[mu];
    EXPECT_EQ(s.id, mu);
    // inputs shared within an alpha block differ only by noise; labels identical
    EXPECT_EQ(s.labels, d.samples[mu - mu % 4].labels);
    const float* re = s.input.data();
    const float* im = re + 256;
    const float* ph = im + 256;
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        EXPECT_EQ(re[i * 16 + j], re[j * 16 + i]);
        EXPECT_EQ(im[i * 16 + j], -im[j * 16 + i]);
        EXPECT_LE(std::abs(ph[i * 16 + j]), static_cast<float>(std::numbers::pi));
      }
    for (double doa : s.doas_deg) {
      const int q = p.region_of_angle(doa);
      const auto l = s.label(q, p.region_len);
      const int arg = static_cast<int>(std::max_element(l.begin(), l.end()) - l.begin());
      EXPECT_LE(std::abs(p.first_index(q) + arg - p.grid.nearest_index(doa)), 1);
    }
  }
}

TEST(GenerateDataset, DeterministicBytes) {
  const DatasetConfig cfg = small_config();
  const auto a = serialize_dataset(generate_dataset(cfg, kUla16, 1));
  const auto b = serialize_dataset(generate_dataset(cfg, kUla16, 4));
  EXPECT_EQ(a, b);
}

TEST(SplitTrainVal, Sizes) {
  DatasetConfig cfg = small_config();
  cfg.j_alpha = 5;
  cfg.j_beta = 1;
  const Dataset d = generate_dataset(cfg, kUla16);
  ASSERT_EQ(d.size(), 10u);
  const auto [train, val] = split_train_val(d, 0.8, 3);
  EXPECT_EQ(train.size(), 8u);
  EXPECT_EQ(val.size(), 2u);
  std::vector<Sample> all = train.samples;
  all.insert(all.end(), val.samples.begin(), val.samples.end());
  std::sort(all.begin(), all.end(), [](const Sample& a, const Sample& b) { return a.id < b.id; });
  EXPECT_EQ(all, d.samples);
  EXPECT_THROW(split_train_val(Dataset{}, 0.8, 1), Error);
  EXPECT_THROW(split_train_val(d, 1.0, 1), Error);
}

TEST(SplitTrainVal, DefaultRatio) {
  Dataset d;
  d.samples.resize(40000);
  d.header.num_samples = 40000;
  const auto [train, val] = split_train_val(d, 0.8, 1);
  EXPECT_EQ(train.size(), 32000u);
  EXPECT_EQ(val.size(), 8000u);
}

TEST(DatasetFile, RoundTrip) {
  const Dataset d = generate_dataset(small_config(), kUla16);
  const std::string path = temp_path("roundtrip.dmds");
  save_dataset(d, path);
  EXPECT_EQ(load_dataset(path), d);
  std::filesystem::remove(path);
}

TEST(DatasetFile, TypedErrors) {
  const auto bytes = serialize_dataset(generate_dataset(small_config(), kUla16));
  auto code_of = [](std::span<const std::uint8_t> b) {
    try {
      (void)deserialize_dataset(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  EXPECT_EQ(code_of(std::span(bytes).first(bytes.size() - 7)), ErrorCode::Truncated);
  EXPECT_EQ(code_of(std::span(bytes).first(20)), ErrorCode::Truncated);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_EQ(code_of(bad_magic), ErrorCode::Format);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_EQ(code_of(bad_version), ErrorCode::Version);
  EXPECT_EQ(code_of(std::span(bytes).first(2)), ErrorCode::Format);
  EXPECT_THROW(load_dataset("/nonexistent/dir/x.dmds"), Error);
}

TEST(DatasetFile, HeaderLayout) {
  const Dataset d = generate_dataset(small_config(), kUla16);
  const auto bytes = serialize_dataset(d);
  io::Reader r(bytes, "t");
  r.expect_magic("DMDS");
  EXPECT_EQ(r.get<std::uint16_t>(), 1);
  EXPECT_EQ(r.get<std::uint32_t>(), 16u);   // M
  EXPECT_EQ(r.get<std::uint32_t>(), 256u);  // N
  EXPECT_EQ(r.get<std::uint32_t>(), 8u);    // Q
  EXPECT_EQ(r.get<std::uint32_t>(), 32u);   // L
  EXPECT_EQ(r.get<std::uint32_t>(), 2u);    // K
  EXPECT_EQ(r.get<std::uint32_t>(), 12u);   // J
  EXPECT_EQ(r.get<std::uint32_t>(), 50u);   // T
  EXPECT_EQ(r.get<std::uint32_t>(), 2u);    // SNR count
  const std::size_t header = 4 + 2 + 8 * 4 + 2 * 8 + 2 * 8 + 8;
  const std::size_t record = 4 + 2 * 8 + 4 * (3 * 256 + 256);
  EXPECT_EQ(bytes.size(), header + 12 * record);
}

}  // namespace
}  // namespace dm
