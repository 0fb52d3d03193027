#include "deepmusic/deepmusic.h"

#include <exception>
#include <functional>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "deepmusic/bench.hpp"
#include "deepmusic/config.hpp"
#include "deepmusic/datagen.hpp"
#include "deepmusic/error.hpp"
#include "deepmusic/estimator.hpp"

struct dm_config {
  dm::Config cfg;
};

struct dm_dataset {
  dm::Dataset data;
};

struct dm_model {
  explicit dm_model(dm::DeepMusicModel m) : model(std::move(m)) {}
  dm::DeepMusicModel model;
};

struct dm_table {
  dm::bench::Table table;
  std::string csv;
};

namespace {

thread_local std::string last_error;

dm_status to_status(dm::ErrorCode code) {
  switch (code) {
    case dm::ErrorCode::InvalidArgument: return DM_ERR_INVALID_ARGUMENT;
    case dm::ErrorCode::Io: return DM_ERR_IO;
    case dm::ErrorCode::Format: return DM_ERR_FORMAT;
    case dm::ErrorCode::Truncated: return DM_ERR_TRUNCATED;
    case dm::ErrorCode::Version: return DM_ERR_VERSION;
    case dm::ErrorCode::Config: return DM_ERR_CONFIG;
    case dm::ErrorCode::Internal: return DM_ERR_INTERNAL;
  }
  return DM_ERR_INTERNAL;
}

template <class Fn>
dm_status guarded(Fn&& fn) {
  try {
    fn();
    last_error.clear();
    return DM_OK;
  } catch (const dm::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return DM_ERR_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return DM_ERR_INTERNAL;
  } catch (...) {
    last_error = "unknown error";
    return DM_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (p == nullptr) dm::fail(dm::ErrorCode::InvalidArgument, std::string(what) + " is null");
}

dm::CovMatrix read_cov(const double* re, const double* im, int m) {
  need(re, "cov_re");
  need(im, "cov_im");
  dm::require(m >= 1, "covariance size must be positive");
  dm::CovMatrix r;
  r.data.resize(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) r.data(i, j) = {re[i * m + j], im[i * m + j]};
  return r;
}

void check_size(const dm_model* model, int m) {
  if (m != model->model.array().num_elements)
    dm::fail(dm::ErrorCode::InvalidArgument, "covariance is " + std::to_string(m) + " x " + std::to_string(m) +
                                                 " but the model expects M = " +
                                                 std::to_string(model->model.array().num_elements));
}

unsigned threads_of(const dm::Config& c) { return static_cast<unsigned>(c.get_int("train.threads")); }

dm_status make_table(dm_table** out, const std::function<dm::bench::Table()>& run) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto t = std::make_unique<dm_table>();
    t->table = run();
    *out = t.release();
  });
}

}  // namespace

extern "C" {

const char* dm_version(void) { return "1.0.0"; }

const char* dm_status_name(dm_status status) {
  switch (status) {
    case DM_OK: return "ok";
    case DM_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DM_ERR_IO: return "io";
    case DM_ERR_FORMAT: return "format";
    case DM_ERR_TRUNCATED: return "truncated";
    case DM_ERR_VERSION: return "version";
    case DM_ERR_CONFIG: return "config";
    case DM_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dm_last_error(void) { return last_error.c_str(); }

dm_status dm_config_create(dm_config** out) {
  return guarded([&] {
    need(out, "out");
    *out = new dm_config();
  });
}

void dm_config_destroy(dm_config* cfg) { delete cfg; }

dm_status dm_config_load_file(dm_config* cfg, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(path, "path");
    cfg->cfg.load_file(path);
  });
}

dm_status dm_config_set(dm_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

dm_status dm_config_set_assignment(dm_config* cfg, const char* assignment) {
  return guarded([&] {
    need(cfg, "config");
    need(assignment, "assignment");
    cfg->cfg.set_assignment(assignment);
  });
}

dm_status dm_config_apply_env(dm_config* cfg, char** envp) {
  return guarded([&] {
    need(cfg, "config");
    if (envp != nullptr) cfg->cfg.apply_env(envp);
  });
}

dm_status dm_config_get(const dm_config* cfg, const char* key, const char** value) {
  return guarded([&] {
    need(cfg, "config");
    need(key, "key");
    need(value, "value");
    *value = cfg->cfg.get(key).c_str();
  });
}

size_t dm_config_key_count(void) { return dm::config_keys().size(); }

dm_status dm_config_key_info(size_t index, const char** name, const char** default_value, const char** help) {
  return guarded([&] {
    const auto& keys = dm::config_keys();
    dm::require(index < keys.size(), "key index out of range");
    if (name) *name = keys[index].name;
    if (default_value) *default_value = keys[index].default_value;
    if (help) *help = keys[index].help;
  });
}

dm_status dm_dataset_generate(const dm_config* cfg, dm_dataset** out) {
  return guarded([&] {
    need(cfg, "config");
    need(out, "out");
    *out = nullptr;
    auto d = std::make_unique<dm_dataset>();
    d->data = dm::generate_dataset(cfg->cfg.dataset(), cfg->cfg.array(), threads_of(cfg->cfg));
    *out = d.release();
  });
}

dm_status dm_dataset_load(const char* path, dm_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto d = std::make_unique<dm_dataset>();
    d->data = dm::load_dataset(path);
    *out = d.release();
  });
}

dm_status dm_dataset_save(const dm_dataset* data, const char* path) {
  return guarded([&] {
    need(data, "dataset");
    need(path, "path");
    dm::save_dataset(data->data, path);
  });
}

dm_status dm_dataset_get_info(const dm_dataset* data, dm_dataset_info* info) {
  return guarded([&] {
    need(data, "dataset");
    need(info, "info");
    const auto& h = data->data.header;
    *info = {h.num_elements, h.num_points, h.num_regions, h.region_len,
             h.num_sources,  h.num_samples, h.num_snapshots, h.seed};
  });
}

void dm_dataset_destroy(dm_dataset* data) { delete data; }

dm_status dm_model_train(const dm_config* cfg, const dm_dataset* data, dm_epoch_callback callback, void* user,
                         dm_model** out) {
  return guarded([&] {
    need(cfg, "config");
    need(data, "dataset");
    need(out, "out");
    *out = nullptr;
    const auto& c = cfg->cfg;
    const auto tc = c.train();
    dm::ArrayConfig array = c.array();
    array.num_elements = static_cast<int>(data->data.header.num_elements);
    const auto [train, val] = dm::split_train_val(data->data, c.train_fraction(), tc.seed);
    dm::RegionEpochCallback on_epoch;
    if (callback != nullptr) {
      on_epoch = [callback, user](int q, const dm::nn::EpochRecord& r) {
        callback(user, q, r.epoch, r.train_loss, r.val_loss, r.learning_rate);
      };
    }
    *out = new dm_model(dm::train_model(train, val, array, c.net(), tc, threads_of(c), on_epoch));
  });
}

dm_status dm_model_load(const char* path, dm_model** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    *out = new dm_model(dm::load_model(path));
  });
}

dm_status dm_model_save(const dm_model* model, const char* path) {
  return guarded([&] {
    need(model, "model");
    need(path, "path");
    dm::save_model(model->model, path);
  });
}

dm_status dm_model_num_regions(const dm_model* model, int* regions) {
  return guarded([&] {
    need(model, "model");
    need(regions, "regions");
    *regions = model->model.num_regions();
  });
}

dm_status dm_model_train_summary(const dm_model* model, int region, dm_train_summary* summary) {
  return guarded([&] {
    need(model, "model");
    need(summary, "summary");
    dm::require(region >= 0 && region < model->model.num_regions(), "region out of range");
    const auto& log = model->model.checkpoints()[region].log;
    *summary = {};
    summary->epochs = static_cast<uint32_t>(log.epochs.size());
    summary->best_epoch = log.best_epoch;
    if (!log.epochs.empty()) {
      summary->first_val_loss = log.epochs.front().val_loss;
      if (log.best_epoch >= 1 && log.best_epoch <= log.epochs.size())
        summary->best_val_loss = log.epochs[log.best_epoch - 1].val_loss;
    }
  });
}

dm_status dm_model_estimate(dm_model* model, const double* cov_re, const double* cov_im, int m, int num_sources,
                            double* angles, int* degraded) {
  return guarded([&] {
    need(model, "model");
    need(angles, "angles");
    check_size(model, m);
    const auto est = dm::estimate_doas(model->model, read_cov(cov_re, cov_im, m), num_sources);
    for (std::size_t k = 0; k < est.angles_deg.size(); ++k) angles[k] = est.angles_deg[k];
    if (degraded) *degraded = est.degraded ? 1 : 0;
  });
}

dm_status dm_model_spectrum(dm_model* model, const double* cov_re, const double* cov_im, int m, double* spectrum,
                            size_t length) {
  return guarded([&] {
    need(model, "model");
    need(spectrum, "spectrum");
    check_size(model, m);
    const auto n = static_cast<size_t>(model->model.partition().grid.num_points);
    dm::require(length == n, "spectrum buffer must hold N = " + std::to_string(n) + " values");
    const auto x = dm::build_input_tensor(read_cov(cov_re, cov_im, m));
    const auto s = model->model.predict_full_spectrum(x);
    for (size_t i = 0; i < n; ++i) spectrum[i] = s[i];
  });
}

void dm_model_destroy(dm_model* model) { delete model; }

dm_status dm_bench_snr(const dm_config* cfg, dm_model* model, dm_table** out) {
  return make_table(out, [&] {
    need(cfg, "config");
    return dm::bench::run_rmse_vs_snr(cfg->cfg.eval(), model ? &model->model : nullptr);
  });
}

dm_status dm_bench_corr(const dm_config* cfg, dm_model* model, dm_table** out) {
  return make_table(out, [&] {
    need(cfg, "config");
    return dm::bench::run_correlation_sweep(cfg->cfg.eval(), model ? &model->model : nullptr);
  });
}

dm_status dm_bench_time(const dm_config* cfg, dm_model* model, dm_table** out) {
  return make_table(out, [&] {
    need(cfg, "config");
    return dm::bench::time_methods(cfg->cfg.eval(), cfg->cfg.timing(), model ? &model->model : nullptr);
  });
}

dm_status dm_eval(const dm_config* cfg, dm_model* model, dm_table** out) {
  return make_table(out, [&] {
    need(cfg, "config");
    if (model == nullptr) dm::fail(dm::ErrorCode::Config, "eval needs a trained model (model.path)");
    auto ec = cfg->cfg.eval();
    bool has = false;
    for (auto m : ec.methods) has = has || m == dm::bench::Method::DeepMusic;
    if (!has) ec.methods.insert(ec.methods.begin(), dm::bench::Method::DeepMusic);
    return dm::bench::run_rmse_vs_snr(ec, &model->model);
  });
}

dm_status dm_emit_spectra(const dm_config* cfg, dm_model* model, const char* path) {
  return guarded([&] {
    need(cfg, "config");
    need(model, "model");
    need(path, "path");
    const std::string csv = dm::bench::spectra_csv(cfg->cfg.eval(), model->model);
    std::ofstream f(path, std::ios::binary);
    if (!f) dm::fail(dm::ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    f << csv;
    if (!f) dm::fail(dm::ErrorCode::Io, std::string("write failed: ") + path);
  });
}

size_t dm_table_rows(const dm_table* table) { return table ? table->table.rows.size() : 0; }

dm_status dm_table_row(const dm_table* table, size_t index, dm_row* row) {
  return guarded([&] {
    need(table, "table");
    need(row, "row");
    dm::require(index < table->table.rows.size(), "row index out of range");
    const auto& r = table->table.rows[index];
    *row = {r.method.c_str(), r.sweep_value, r.rmse_deg, r.crb_deg, r.runtime_s, r.runtime_std_s, r.trials, r.seed};
  });
}

dm_status dm_table_csv(dm_table* table, int with_timing, const char** csv) {
  return guarded([&] {
    need(table, "table");
    need(csv, "csv");
    table->csv = table->table.to_csv(with_timing != 0);
    *csv = table->csv.c_str();
  });
}

dm_status dm_table_write(const dm_table* table, int with_timing, const char* path) {
  return guarded([&] {
    need(table, "table");
    need(path, "path");
    std::ofstream f(path, std::ios::binary);
    if (!f) dm::fail(dm::ErrorCode::Io, std::string("cannot open ") + path + " for writing");
    f << table->table.to_csv(with_timing != 0);
    if (!f) dm::fail(dm::ErrorCode::Io, std::string("write failed: ") + path);
  });
}

void dm_table_destroy(dm_table* table) { delete table; }

}  // extern "C"
