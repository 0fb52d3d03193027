#include "deepmusic/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "deepmusic/error.hpp"
#include "deepmusic/subspace.hpp"

namespace dm::bench {

const char* method_name(Method m) {
  switch (m) {
    case Method::DeepMusic: return "deepmusic";
    case Method::SpectralMusic: return "spectral_music";
    case Method::RootMusic: return "root_music";
    case Method::SmoothedMusic: return "smoothed_music";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  for (Method m : {Method::DeepMusic, Method::SpectralMusic, Method::RootMusic, Method::SmoothedMusic})
    if (name == method_name(m)) return m;
  fail(ErrorCode::Config,
       "unknown method '" + name + "' (expected deepmusic, spectral_music, root_music or smoothed_music)");
}

std::vector<Method> parse_methods(const std::string& comma_list) {
  std::vector<Method> out;
  std::stringstream ss(comma_list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    const Method m = parse_method(item);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) fail(ErrorCode::Config, "method list is empty");
  return out;
}

double rmse(const std::vector<std::vector<double>>& estimates, const std::vector<std::vector<double>>& truths) {
  require(estimates.size() == truths.size(), "rmse needs one estimate list per trial");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t t = 0; t < truths.size(); ++t) {
    require(estimates[t].size() == truths[t].size(),
            "trial " + std::to_string(t) + " has " + std::to_string(estimates[t].size()) + " estimates for " +
                std::to_string(truths[t].size()) + " targets");
    auto e = estimates[t], g = truths[t];
    std::sort(e.begin(), e.end());
    std::sort(g.begin(), g.end());
    for (std::size_t k = 0; k < e.size(); ++k) sum += (e[k] - g[k]) * (e[k] - g[k]);
    count += e.size();
  }
  require(count > 0, "rmse needs at least one target");
  return std::sqrt(sum / static_cast<double>(count));
}

Partition EvalConfig::partition() const { return partition_grid(grid, num_regions); }

int EvalConfig::subarray_size() const {
  return smoothing_subarray > 0 ? smoothing_subarray : array.num_elements - num_sources;
}

void EvalConfig::validate() const {
  array.validate();
  (void)partition();
  require(trials >= 1, "eval.trials must be >= 1");
  require(num_snapshots >= 1, "eval.snapshots must be >= 1");
  require(num_sources >= 1 && num_sources < array.num_elements, "sources.count must lie in [1, M)");
  require(num_sources <= num_regions, "sources.count must not exceed grid.regions");
  require(!snr_db.empty(), "eval.snr_db must not be empty");
  require(!methods.empty(), "eval.methods must not be empty");
  require(doas_deg.empty() || static_cast<int>(doas_deg.size()) == num_sources,
          "eval.doas must list exactly sources.count angles");
  require(doa_jitter_deg >= 0.0, "eval.doa_jitter_deg must be >= 0");
  require(guard_steps >= 0, "eval.guard_steps must be >= 0");
  const int sub = subarray_size();
  require(sub > num_sources && sub <= array.num_elements, "eval.smoothing_subarray must lie in (K, M]");
  for (double r : rho) require(r >= 0.0 && r <= 1.0, "eval.rho values must lie in [0, 1]");
}

const Row& Table::find(const std::string& method, double sweep_value) const {
  for (const auto& r : rows)
    if (r.method == method && r.sweep_value == sweep_value) return r;
  fail(ErrorCode::InvalidArgument, "no row for " + method + " at " + std::to_string(sweep_value));
}

std::string Table::to_csv(bool with_timing) const {
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  const bool has_std = sweep == "grid_points";
  std::string out = "method,sweep_value,rmse_deg,crb_deg,runtime_s,trials,seed";
  out += has_std ? ",runtime_std_s\n" : "\n";
  for (const auto& r : rows) {
    const bool timed = with_timing || has_std;
    out += r.method + "," + num(r.sweep_value) + "," + (has_std ? "" : num(r.rmse_deg)) + "," +
           (has_std ? "" : num(r.crb_deg)) + "," + (timed ? num(r.runtime_s) : "") + "," +
           std::to_string(r.trials) + "," + std::to_string(r.seed);
    if (has_std) out += "," + num(r.runtime_std_s);
    out += "\n";
  }
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<double> trial_doas(const EvalConfig& cfg, const Partition& partition, int trial) {
  Philox rng(cfg.seed, substream(static_cast<std::uint64_t>(trial), 0));
  if (cfg.doas_deg.empty()) return draw_region_doas(rng, partition, cfg.num_sources, cfg.guard_steps);
  const double u = cfg.doa_jitter_deg > 0.0 ? rng.uniform(-cfg.doa_jitter_deg, cfg.doa_jitter_deg) : 0.0;
  std::vector<double> doas = cfg.doas_deg;
  for (auto& d : doas) d += u;
  std::sort(doas.begin(), doas.end());
  return doas;
}

/// Shortfalls (Root-MUSIC finding fewer roots than sources) repeat the
/// estimates found, or broadside when none were.
std::vector<double> pad_to(std::vector<double> v, int k) {
  const std::size_t found = v.size();
  while (static_cast<int>(v.size()) < k) v.push_back(found ? v[v.size() % found] : 0.0);
  return v;
}

struct Runner {
  const EvalConfig& cfg;
  DeepMusicModel* model;
  AngularGrid grid;

  std::vector<double> run(Method m, const CovMatrix& r) const {
    const int k = cfg.num_sources;
    switch (m) {
      case Method::SpectralMusic:
        return spectral_peaks(music_spectrum(eigendecompose(r, k), grid, cfg.array), k).angles_deg;
      case Method::RootMusic:
        return pad_to(root_music(eigendecompose(r, k), cfg.array).angles_deg, k);
      case Method::SmoothedMusic: {
        const int sub = cfg.subarray_size();
        const ArrayConfig sub_array{sub, cfg.array.spacing_wavelengths};
        return spectral_peaks(music_spectrum(eigendecompose(forward_backward_smooth(r, sub), k), grid, sub_array), k)
            .angles_deg;
      }
      case Method::DeepMusic:
        return estimate_doas(*model, r, k).angles_deg;
    }
    return {};
  }
};

void check_model(const EvalConfig& cfg, const std::vector<Method>& methods, DeepMusicModel* model) {
  if (std::find(methods.begin(), methods.end(), Method::DeepMusic) == methods.end()) return;
  if (!model) fail(ErrorCode::Config, "method deepmusic requires a model bundle (model.path)");
  if (model->array().num_elements != cfg.array.num_elements ||
      model->array().spacing_wavelengths != cfg.array.spacing_wavelengths)
    fail(ErrorCode::Config, "model bundle array does not match array.elements / array.spacing");
  if (!(model->partition() == cfg.partition()))
    fail(ErrorCode::Config, "model bundle grid does not match grid.start_deg / grid.final_deg / grid.points / grid.regions");
}

struct SweepPoint {
  double value;
  CMatrix gamma;
  double noise_variance;
};

void run_sweep(const EvalConfig& cfg, const std::vector<Method>& methods, DeepMusicModel* model,
               const std::vector<SweepPoint>& points, Table& table) {
  const Partition partition = cfg.partition();
  const Runner runner{cfg, model, cfg.grid};
  for (const auto& pt : points) {
    std::vector<std::vector<std::vector<double>>> est(methods.size());
    std::vector<std::vector<double>> truths;
    std::vector<double> seconds(methods.size(), 0.0);
    double crb_sq = 0.0;
    for (int t = 0; t < cfg.trials; ++t) {
      const auto doas = trial_doas(cfg, partition, t);
      const SourceConfig src{doas, pt.gamma, pt.noise_variance};
      Philox noise(cfg.seed, substream(static_cast<std::uint64_t>(t), 1));
      const CovMatrix r = sample_covariance(simulate_snapshots(src, cfg.array, cfg.num_snapshots, noise));
      truths.push_back(doas);
      for (std::size_t i = 0; i < methods.size(); ++i) {
        const auto start = Clock::now();
        est[i].push_back(runner.run(methods[i], r));
        seconds[i] += std::chrono::duration<double>(Clock::now() - start).count();
      }
      for (double c : stochastic_crb(src, cfg.array, cfg.num_snapshots)) crb_sq += c * c;
    }
    const double crb = std::sqrt(crb_sq / (static_cast<double>(cfg.trials) * cfg.num_sources));
    for (std::size_t i = 0; i < methods.size(); ++i)
      table.rows.push_back({method_name(methods[i]), pt.value, rmse(est[i], truths), crb,
                            seconds[i] / cfg.trials, 0.0, cfg.trials, cfg.seed});
    table.rows.push_back({"crb", pt.value, crb, crb, 0.0, 0.0, cfg.trials, cfg.seed});
  }
}

}  // namespace

Table run_rmse_vs_snr(const EvalConfig& cfg, DeepMusicModel* model) {
  cfg.validate();
  check_model(cfg, cfg.methods, model);
  std::vector<SweepPoint> points;
  for (double snr : cfg.snr_db)
    points.push_back({snr, CMatrix::Identity(cfg.num_sources, cfg.num_sources), noise_variance_for_snr(snr)});
  Table table{"snr_db", {}};
  run_sweep(cfg, cfg.methods, model, points, table);
  return table;
}

Table run_correlation_sweep(const EvalConfig& cfg, DeepMusicModel* model) {
  cfg.validate();
  require(cfg.num_sources == 2, "the correlation sweep needs sources.count = 2");
  require(!cfg.rho.empty(), "eval.rho must not be empty");
  std::vector<Method> methods;
  for (Method m : cfg.methods)
    if (m != Method::SmoothedMusic) methods.push_back(m);
  if (std::find(methods.begin(), methods.end(), Method::SpectralMusic) != methods.end())
    methods.push_back(Method::SmoothedMusic);
  check_model(cfg, methods, model);
  std::vector<SweepPoint> points;
  for (double rho : cfg.rho)
    points.push_back({rho, correlated_pair_covariance(1.0, 1.0, rho), noise_variance_for_snr(cfg.corr_snr_db)});
  Table table{"rho", {}};
  run_sweep(cfg, methods, model, points, table);
  return table;
}

std::string spectra_csv(const EvalConfig& cfg, DeepMusicModel& model) {
  cfg.validate();
  EvalConfig with_model = cfg;
  with_model.methods = {Method::DeepMusic};
  check_model(with_model, with_model.methods, &model);
  const Partition partition = cfg.partition();
  const auto doas = trial_doas(cfg, partition, 0);
  std::string out = "snr_db,grid_index,angle_deg,deepmusic,spectral_music,label\n";
  char buf[160];
  for (double snr : cfg.snr_db) {
    const auto src = SourceConfig::uncorrelated(doas, 1.0, noise_variance_for_snr(snr));
    Philox noise(cfg.seed, substream(0, 1));
    const CovMatrix r = sample_covariance(simulate_snapshots(src, cfg.array, cfg.num_snapshots, noise));
    const auto deep = model.predict_full_spectrum(build_input_tensor(r));
    const auto music = music_spectrum(eigendecompose(r, cfg.num_sources), cfg.grid, cfg.array);
    const auto label = normalized_label_spectrum(doas, partition, cfg.array, src.signal_covariance);
    for (int i = 0; i < cfg.grid.num_points; ++i) {
      std::snprintf(buf, sizeof buf, "%.10g,%d,%.10g,%.10g,%.10g,%.10g\n", snr, i, cfg.grid.angle(i), deep[i],
                    music.values[i], label[i]);
      out += buf;
    }
  }
  return out;
}

Table time_methods(const EvalConfig& cfg, const TimingConfig& timing, DeepMusicModel* model) {
  cfg.validate();
  require(timing.repetitions >= 2, "time.repetitions must be >= 2");
  require(timing.warmup >= 0, "time.warmup must be >= 0");
  check_model(cfg, cfg.methods, model);
  std::vector<int> sizes = timing.grid_points;
  if (sizes.empty()) sizes.push_back(cfg.grid.num_points);

  const auto doas = trial_doas(cfg, cfg.partition(), 0);
  const SourceConfig src = SourceConfig::uncorrelated(doas, 1.0, noise_variance_for_snr(timing.snr_db));
  Philox noise(cfg.seed, substream(0, 1));
  const CovMatrix r = sample_covariance(simulate_snapshots(src, cfg.array, cfg.num_snapshots, noise));

  Table table{"grid_points", {}};
  for (Method m : cfg.methods) {
    for (int n : sizes) {
      if (m == Method::DeepMusic && n != cfg.grid.num_points) continue;
      if (m == Method::RootMusic && n != sizes.front()) continue;  // grid-free
      require(n >= 2, "time.grid_points entries must be >= 2");
      const Runner runner{cfg, model, make_grid(cfg.grid.start_deg, cfg.grid.final_deg, n)};
      for (int w = 0; w < timing.warmup; ++w) runner.run(m, r);
      std::vector<double> t(timing.repetitions);
      for (auto& s : t) {
        const auto start = Clock::now();
        const auto est = runner.run(m, r);
        s = std::chrono::duration<double>(Clock::now() - start).count();
        if (est.empty()) fail(ErrorCode::Internal, "timed method returned no estimate");
      }
      double mean = 0.0, var = 0.0;
      for (double s : t) mean += s;
      mean /= t.size();
      for (double s : t) var += (s - mean) * (s - mean);
      const double sd = std::sqrt(var / (t.size() - 1));
      table.rows.push_back({method_name(m), static_cast<double>(n), 0.0, 0.0, mean, sd, timing.repetitions, cfg.seed});
    }
  }
  return table;
}

}  // namespace dm::bench
