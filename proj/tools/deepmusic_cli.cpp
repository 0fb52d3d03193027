// deepmusic: dataset generation, training, evaluation and benchmarks.
// Links only the C API.

#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "deepmusic/deepmusic.h"

extern char** environ;

namespace {

struct Failure {
  dm_status status;
  std::string message;
};

void check(dm_status s) {
  if (s != DM_OK) throw Failure{s, dm_last_error()};
}

template <class T, void (*Destroy)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() {
    if (p) Destroy(p);
  }
};

using ConfigH = Handle<dm_config, dm_config_destroy>;
using DatasetH = Handle<dm_dataset, dm_dataset_destroy>;
using ModelH = Handle<dm_model, dm_model_destroy>;
using TableH = Handle<dm_table, dm_table_destroy>;

struct Options {
  std::string config_file;
  std::vector<std::string> sets;
  std::string methods;
  std::string emit_spectrum;
  std::string output;
  bool quiet = false;
};

std::string get(const dm_config* cfg, const char* key) {
  const char* v = nullptr;
  check(dm_config_get(cfg, key, &v));
  return v;
}

bool truthy(const std::string& v) { return v == "true" || v == "1" || v == "yes" || v == "on"; }

bool wants_deepmusic(const dm_config* cfg) {
  std::string list = get(cfg, "eval.methods");
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string::npos) end = list.size();
    std::string tok = list.substr(start, end - start);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    if (tok == "deepmusic") return true;
    start = end + 1;
  }
  return false;
}

void build_config(ConfigH& cfg, const Options& o) {
  check(dm_config_create(&cfg.p));
  if (!o.config_file.empty()) check(dm_config_load_file(cfg.p, o.config_file.c_str()));
  check(dm_config_apply_env(cfg.p, environ));
  for (const auto& s : o.sets) check(dm_config_set_assignment(cfg.p, s.c_str()));
  if (!o.methods.empty()) check(dm_config_set(cfg.p, "eval.methods", o.methods.c_str()));
  if (!o.output.empty()) check(dm_config_set(cfg.p, "output.csv", o.output.c_str()));
  if (!o.emit_spectrum.empty()) check(dm_config_set(cfg.p, "output.spectrum", o.emit_spectrum.c_str()));
}

void load_model(const dm_config* cfg, ModelH& model) {
  check(dm_model_load(get(cfg, "model.path").c_str(), &model.p));
}

void write_table(const dm_config* cfg, dm_table* table, bool force_timing) {
  const bool timing = force_timing || truthy(get(cfg, "output.timing"));
  const std::string path = get(cfg, "output.csv");
  if (!path.empty()) {
    check(dm_table_write(table, timing ? 1 : 0, path.c_str()));
    return;
  }
  const char* csv = nullptr;
  check(dm_table_csv(table, timing ? 1 : 0, &csv));
  std::fputs(csv, stdout);
}

void emit_spectrum(const dm_config* cfg, dm_model* model) {
  const std::string path = get(cfg, "output.spectrum");
  if (path.empty()) return;
  if (model == nullptr) throw Failure{DM_ERR_CONFIG, "--emit-spectrum needs deepmusic in eval.methods and a model"};
  check(dm_emit_spectra(cfg, model, path.c_str()));
}

void on_epoch(void* user, int region, uint32_t epoch, double train_loss, double val_loss, double lr) {
  if (*static_cast<bool*>(user)) return;
  std::fprintf(stderr, "region %d epoch %u train %.6e val %.6e lr %.4g\n", region, epoch, train_loss, val_loss, lr);
}

void cmd_gen_data(const Options& o) {
  ConfigH cfg;
  build_config(cfg, o);
  DatasetH data;
  check(dm_dataset_generate(cfg.p, &data.p));
  const std::string path = get(cfg.p, "data.path");
  check(dm_dataset_save(data.p, path.c_str()));
  dm_dataset_info info{};
  check(dm_dataset_get_info(data.p, &info));
  if (!o.quiet)
    std::fprintf(stderr, "wrote %s: J=%u M=%u N=%u Q=%u L=%u K=%u T=%u\n", path.c_str(), info.num_samples,
                 info.num_elements, info.num_points, info.num_regions, info.region_len, info.num_sources,
                 info.num_snapshots);
}

void cmd_train(const Options& o) {
  ConfigH cfg;
  build_config(cfg, o);
  DatasetH data;
  check(dm_dataset_load(get(cfg.p, "data.path").c_str(), &data.p));
  ModelH model;
  bool quiet = o.quiet;
  check(dm_model_train(cfg.p, data.p, on_epoch, &quiet, &model.p));
  const std::string path = get(cfg.p, "model.path");
  check(dm_model_save(model.p, path.c_str()));
  if (o.quiet) return;
  int regions = 0;
  check(dm_model_num_regions(model.p, &regions));
  for (int q = 0; q < regions; ++q) {
    dm_train_summary s{};
    check(dm_model_train_summary(model.p, q, &s));
    std::fprintf(stderr, "region %d: %u epochs, best epoch %u, val loss %.6e -> %.6e\n", q, s.epochs, s.best_epoch,
                 s.first_val_loss, s.best_val_loss);
  }
  std::fprintf(stderr, "wrote %s\n", path.c_str());
}

using BenchFn = dm_status (*)(const dm_config*, dm_model*, dm_table**);

void cmd_bench(const Options& o, BenchFn fn, bool force_model, bool force_timing) {
  ConfigH cfg;
  build_config(cfg, o);
  ModelH model;
  if (force_model || wants_deepmusic(cfg.p)) load_model(cfg.p, model);
  TableH table;
  check(fn(cfg.p, model.p, &table.p));
  write_table(cfg.p, table.p, force_timing);
  emit_spectrum(cfg.p, model.p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DeepMUSIC direction-of-arrival estimation"};
  app.set_version_flag("--version", std::string(dm_version()));
  app.require_subcommand(1);
  app.fallthrough();

  Options o;
  app.add_option("-c,--config", o.config_file, "key=value configuration file");
  app.add_option("-s,--set", o.sets, "override one key (key=value), repeatable")->take_all();
  app.add_option("-m,--methods", o.methods, "comma list of deepmusic, spectral_music, root_music");
  app.add_option("-o,--output", o.output, "CSV output path (default stdout)");
  app.add_option("--emit-spectrum", o.emit_spectrum, "write predicted and reference spectra as CSV");
  app.add_flag("-q,--quiet", o.quiet, "no progress on stderr");

  std::function<void()> run;
  app.add_subcommand("gen-data", "generate and save the training dataset")->callback([&] { run = [&] { cmd_gen_data(o); }; });
  app.add_subcommand("train", "train the Q region networks and save the model bundle")
      ->callback([&] { run = [&] { cmd_train(o); }; });
  app.add_subcommand("eval", "RMSE versus SNR of a trained model against the baselines")
      ->callback([&] { run = [&] { cmd_bench(o, dm_eval, true, false); }; });
  app.add_subcommand("bench-snr", "RMSE versus SNR with the CRB")
      ->callback([&] { run = [&] { cmd_bench(o, dm_bench_snr, false, false); }; });
  app.add_subcommand("bench-corr", "RMSE versus source correlation")
      ->callback([&] { run = [&] { cmd_bench(o, dm_bench_corr, false, false); }; });
  app.add_subcommand("bench-time", "covariance-to-DOA latency per method")
      ->callback([&] { run = [&] { cmd_bench(o, dm_bench_time, false, true); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "deepmusic: usage error: %s\n", e.what());
    return 2;
  }

  try {
    run();
  } catch (const Failure& f) {
    std::string msg = f.message;
    for (char& ch : msg)
      if (ch == '\n') ch = ' ';
    std::fprintf(stderr, "deepmusic: %s error: %s\n", dm_status_name(f.status), msg.c_str());
    return 1;
  }
  return 0;
}
