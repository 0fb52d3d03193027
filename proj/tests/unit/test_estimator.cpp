#include <gtest/gtest.h>

#include <numeric>

#include "deepmusic/error.hpp"
#include "deepmusic/estimator.hpp"

namespace {

using namespace dm;

struct SmallModel {
  ArrayConfig array{13, 0.5};
  Dataset data;
  std::unique_ptr<DeepMusicModel> model;

  SmallModel() {
    DatasetConfig cfg;
    cfg.j_alpha = 12;
    cfg.j_beta = 2;
    cfg.num_snapshots = 50;
    cfg.snr_train_db = {30.0};
    cfg.num_sources = 2;
    cfg.num_regions = 4;
    cfg.grid = make_grid(-60.0, 60.0, 64);
    cfg.seed = 4;
    data = generate_dataset(cfg, array, 1);
    auto [train, val] = split_train_val(data, 0.75, 4);
    nn::TrainConfig tc;
    tc.batch_size = 8;
    tc.max_epochs = 2;
    model = std::make_unique<DeepMusicModel>(train_model(train, val, array, NetConfig{3, 16, 0.5}, tc, 1));
  }
};

SmallModel& small() {
  static SmallModel m;
  return m;
}

InputTensor some_input() {
  const auto src = SourceConfig::uncorrelated({-20.0, 33.0}, 1.0, 0.1);
  return build_input_tensor(sample_covariance(simulate_snapshots(src, small().array, 40, 77)));
}

TEST(Estimator, SubspectrumIsDeterministicSoftmax) {
  auto& m = *small().model;
  const auto x = some_input();
  for (int q = 0; q < m.num_regions(); ++q) {
    const auto a = m.predict_subspectrum(q, x);
    ASSERT_EQ(a.size(), 16u);
    EXPECT_NEAR(std::accumulate(a.begin(), a.end(), 0.0), 1.0, 1e-6);
    EXPECT_EQ(m.predict_subspectrum(q, x), a);
  }
  EXPECT_THROW(m.predict_subspectrum(4, x), Error);
  EXPECT_THROW(m.predict_subspectrum(-1, x), Error);
}

TEST(Estimator, FullSpectrumConcatenatesRegions) {
  auto& m = *small().model;
  const auto x = some_input();
  // reverse order first: no state carries between networks
  std::vector<std::vector<double>> subs(4);
  for (int q = 3; q >= 0; --q) subs[q] = m.predict_subspectrum(q, x);
  const auto full = m.predict_full_spectrum(x);
  ASSERT_EQ(full.size(), 64u);
  for (int q = 0; q < 4; ++q)
    EXPECT_EQ(std::vector<double>(full.begin() + 16 * q, full.begin() + 16 * (q + 1)), subs[q]);
  EXPECT_NEAR(std::accumulate(full.begin(), full.end(), 0.0), 4.0, 1e-5);
}

TEST(Estimator, KEqualsQGivesRegionArgmaxes) {
  auto& m = *small().model;
  const auto src = SourceConfig::uncorrelated({-20.0, 33.0}, 1.0, 0.1);
  const auto r = sample_covariance(simulate_snapshots(src, small().array, 40, 77));
  const auto est = estimate_doas(m, r, 4);
  const auto full = m.predict_full_spectrum(build_input_tensor(r));
  ASSERT_EQ(est.angles_deg.size(), 4u);
  for (int q = 0; q < 4; ++q) {
    const auto first = full.begin() + 16 * q;
    const int idx = static_cast<int>(std::max_element(first, first + 16) - full.begin());
    EXPECT_DOUBLE_EQ(est.angles_deg[q], m.partition().grid.angle(idx));
  }
  EXPECT_TRUE(std::is_sorted(est.angles_deg.begin(), est.angles_deg.end()));
  EXPECT_THROW(estimate_doas(m, r, 5), Error);
  EXPECT_THROW(estimate_doas(m, r, 0), Error);
}

TEST(Estimator, TopKSelectionAndTieRule) {
  const auto p = partition_grid(make_grid(0.0, 8.0, 8), 4);
  // region peaks: 0.5, 0.9, 0.9, 0.1
  const std::vector<double> s{0.5, 0.1, 0.2, 0.9, 0.9, 0.3, 0.1, 0.05};
  const auto one = select_doas(s, p, 1);
  EXPECT_EQ(one.regions, std::vector<int>{1});
  EXPECT_EQ(one.angles_deg, std::vector<double>{3.0});
  const auto two = select_doas(s, p, 2);
  EXPECT_EQ(two.regions, (std::vector<int>{1, 2}));
  EXPECT_EQ(two.angles_deg, (std::vector<double>{3.0, 4.0}));
  const auto three = select_doas(s, p, 3);
  EXPECT_EQ(three.regions, (std::vector<int>{0, 1, 2}));
}

TEST(Estimator, BundleRoundTrip) {
  auto& m = *small().model;
  const auto bytes = serialize_model(m);
  auto back = deserialize_model(bytes);
  EXPECT_EQ(serialize_model(back), bytes);
  EXPECT_EQ(back.partition(), m.partition());
  EXPECT_EQ(back.array().num_elements, 13);
  const auto x = some_input();
  EXPECT_EQ(back.predict_full_spectrum(x), m.predict_full_spectrum(x));
}

TEST(Estimator, CorruptBundlesRaiseTypedErrors) {
  const auto bytes = serialize_model(*small().model);
  auto code_of = [](const std::vector<std::uint8_t>& b) {
    try {
      deserialize_model(b);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Internal;
  };
  auto bad = bytes;
  bad[1] = '?';
  EXPECT_EQ(code_of(bad), ErrorCode::Format);
  bad = bytes;
  bad[4] = 3;
  EXPECT_EQ(code_of(bad), ErrorCode::Version);
  EXPECT_EQ(code_of({bytes.begin(), bytes.end() - 10}), ErrorCode::Truncated);
  EXPECT_EQ(code_of({bytes.begin(), bytes.begin() + 20}), ErrorCode::Truncated);
  bad = bytes;
  bad.push_back(1);
  EXPECT_EQ(code_of(bad), ErrorCode::Format);
  // region count that no longer divides N
  bad = bytes;
  bad[2 + 4 + 4 + 8 + 8 + 8 + 4] = 5;
  EXPECT_EQ(code_of(bad), ErrorCode::Format);
  // every single-byte flip is either accepted or a typed error
  for (std::size_t i = 0; i < 64; ++i) {
    auto flip = bytes;
    flip[i] ^= 0xFF;
    try {
      deserialize_model(flip);
    } catch (const Error&) {
    }
  }
}

TEST(Estimator, MismatchedArrayRejected) {
  auto& s = small();
  auto [train, val] = split_train_val(s.data, 0.75, 4);
  EXPECT_THROW(train_model(train, val, ArrayConfig{16, 0.5}, NetConfig{2, 4, 0.5}, nn::TrainConfig{}, 1), Error);
}

}  // namespace
