#include <gtest/gtest.h>

#include "deepmusic/bench.hpp"
#include "deepmusic/config.hpp"
#include "deepmusic/error.hpp"

namespace {

using namespace dm;
using namespace dm::bench;

TEST(Rmse, Examples) {
  EXPECT_EQ(rmse({{1.0, 2.0}}, {{1.0, 2.0}}), 0.0);
  EXPECT_DOUBLE_EQ(rmse({{11.0}, {9.0}}, {{10.0}, {10.0}}), 1.0);
  EXPECT_DOUBLE_EQ(rmse({{20.5, -30.0}}, {{-29.0, 20.0}}), rmse({{-30.0, 20.5}}, {{-29.0, 20.0}}));
  EXPECT_THROW(rmse({{1.0}}, {{1.0, 2.0}}), Error);
  EXPECT_THROW(rmse({{1.0}}, {}), Error);
}

TEST(Methods, Parsing) {
  EXPECT_EQ(parse_methods("spectral_music, root_music,spectral_music"),
            (std::vector<Method>{Method::SpectralMusic, Method::RootMusic}));
  EXPECT_THROW(parse_methods("music"), Error);
  EXPECT_THROW(parse_methods(" , "), Error);
}

EvalConfig small_eval() {
  EvalConfig cfg;
  cfg.grid = make_grid(-60.0, 60.0, 1024);
  cfg.trials = 20;
  cfg.snr_db = {0.0, 10.0, 20.0};
  cfg.methods = {Method::SpectralMusic, Method::RootMusic};
  cfg.seed = 3;
  return cfg;
}

TEST(RmseVsSnr, ShapeAndCrbRows) {
  const auto t = run_rmse_vs_snr(small_eval(), nullptr);
  ASSERT_EQ(t.rows.size(), 9u);
  double prev_crb = INFINITY;
  for (double snr : {0.0, 10.0, 20.0}) {
    const double crb = t.find("crb", snr).rmse_deg;
    EXPECT_LT(crb, prev_crb);
    prev_crb = crb;
    EXPECT_EQ(t.find("spectral_music", snr).crb_deg, crb);
    EXPECT_GE(t.find("spectral_music", snr).rmse_deg, 0.0);
  }
  EXPECT_GT(t.find("spectral_music", 0.0).rmse_deg, t.find("spectral_music", 20.0).rmse_deg);
}

TEST(RmseVsSnr, DeepMusicNeedsModel) {
  auto cfg = small_eval();
  cfg.methods = {Method::DeepMusic};
  try {
    run_rmse_vs_snr(cfg, nullptr);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
  }
}

TEST(RmseVsSnr, CsvIsDeterministic) {
  const auto a = run_rmse_vs_snr(small_eval(), nullptr).to_csv(false);
  const auto b = run_rmse_vs_snr(small_eval(), nullptr).to_csv(false);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.substr(0, a.find('\n')), "method,sweep_value,rmse_deg,crb_deg,runtime_s,trials,seed");
  EXPECT_NE(a.find("spectral_music,0,"), std::string::npos);
}

TEST(CorrelationSweep, RhoZeroMatchesSnrSweep) {
  auto cfg = small_eval();
  cfg.snr_db = {20.0};
  cfg.rho = {0.0, 1.0};
  cfg.corr_snr_db = 20.0;
  const auto snr = run_rmse_vs_snr(cfg, nullptr);
  const auto corr = run_correlation_sweep(cfg, nullptr);
  EXPECT_DOUBLE_EQ(corr.find("spectral_music", 0.0).rmse_deg, snr.find("spectral_music", 20.0).rmse_deg);
  EXPECT_NO_THROW(corr.find("smoothed_music", 1.0));
  EXPECT_GE(corr.find("spectral_music", 1.0).rmse_deg, 2.0 * corr.find("spectral_music", 0.0).rmse_deg);
  EXPECT_LT(corr.find("smoothed_music", 1.0).rmse_deg, corr.find("spectral_music", 1.0).rmse_deg);
}

TEST(CorrelationSweep, NeedsTwoSources) {
  auto cfg = small_eval();
  cfg.num_sources = 3;
  EXPECT_THROW(run_correlation_sweep(cfg, nullptr), Error);
}

TEST(Timing, EachMethodOncePerGrid) {
  auto cfg = small_eval();
  TimingConfig tc;
  tc.repetitions = 5;
  tc.warmup = 1;
  tc.grid_points = {256, 512};
  const auto t = time_methods(cfg, tc, nullptr);
  ASSERT_EQ(t.rows.size(), 3u);  // root-MUSIC is grid-free
  EXPECT_NO_THROW(t.find("spectral_music", 256));
  EXPECT_NO_THROW(t.find("spectral_music", 512));
  EXPECT_NO_THROW(t.find("root_music", 256));
  for (const auto& r : t.rows) EXPECT_GT(r.runtime_s, 0.0);
  const auto csv = t.to_csv(false);
  EXPECT_NE(csv.find("runtime_std_s"), std::string::npos);
}

TEST(EvalConfig, FixedDoasNeedKAngles) {
  auto cfg = small_eval();
  cfg.doas_deg = {10.0};
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(Config, DefaultsAndOverrides) {
  Config c;
  EXPECT_EQ(c.dataset().total_samples(), 40000u);
  EXPECT_EQ(c.array().num_elements, 16);
  EXPECT_EQ(c.eval().num_snapshots, 100);
  EXPECT_EQ(c.dataset().num_snapshots, 500);
  EXPECT_DOUBLE_EQ(c.eval().corr_snr_db, 20.0);
  c.parse("# comment\n grid.points = 512 # trailing\n\ndata.snr_db = 20, 30\n", "test");
  EXPECT_EQ(c.dataset().grid.num_points, 512);
  EXPECT_EQ(c.dataset().snr_train_db, (std::vector<double>{20.0, 30.0}));
  c.set_assignment("eval.methods=spectral_music");
  EXPECT_EQ(c.eval().methods, std::vector<Method>{Method::SpectralMusic});
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Internal;
}

TEST(Config, ErrorsNameTheKey) {
  Config c;
  try {
    c.parse("grid.pionts = 3\n", "bad.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Config);
    EXPECT_NE(std::string(e.what()).find("grid.pionts"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("bad.cfg:1"), std::string::npos);
  }
  c.set("train.batch_size", "12x");
  try {
    c.train();
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("train.batch_size"), std::string::npos);
  }
  Config d;
  d.set("grid.regions", "7");
  EXPECT_EQ(code_of([&] { d.dataset(); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { d.parse("novalue\n", "x"); }), ErrorCode::Config);
  EXPECT_EQ(code_of([&] { d.load_file("/nonexistent/deepmusic.cfg"); }), ErrorCode::Io);
}

TEST(Config, EnvironmentOverride) {
  EXPECT_EQ(env_name("data.snr_db"), "DEEPMUSIC_DATA_SNR_DB");
  std::string a = "DEEPMUSIC_EVAL_TRIALS=7", b = "PATH=/bin", bad = "DEEPMUSIC_NOPE=1";
  char* env[] = {a.data(), b.data(), nullptr};
  Config c;
  c.apply_env(env);
  EXPECT_EQ(c.eval().trials, 7);
  char* env_bad[] = {bad.data(), nullptr};
  EXPECT_EQ(code_of([&] { c.apply_env(env_bad); }), ErrorCode::Config);
}

}  // namespace
