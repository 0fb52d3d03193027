#include "deepmusic/config.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <cstring>
#include <sstream>

#include "deepmusic/binary_io.hpp"
#include "deepmusic/error.hpp"

namespace dm {

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"array.elements", "16", "number of array elements M"},
      {"array.spacing", "0.5", "element spacing in wavelengths"},
      {"grid.start_deg", "-60", "first grid angle"},
      {"grid.final_deg", "60", "end of the grid (exclusive)"},
      {"grid.points", "4096", "grid size N"},
      {"grid.regions", "8", "number of subregions Q"},
      {"data.sources", "5", "sources per training sample"},
      {"data.j_alpha", "100", "DOA draws"},
      {"data.j_beta", "100", "noise realizations per draw and SNR"},
      {"data.snapshots", "500", "snapshots per training sample"},
      {"data.snr_db", "15,20,25,30", "training SNRs"},
      {"data.seed", "1", "dataset seed"},
      {"data.guard_steps", "2", "grid steps kept clear of region edges"},
      {"data.path", "dataset.dmds", "dataset file"},
      {"train.learning_rate", "0.01", "initial learning rate"},
      {"train.momentum", "0.9", "SGD momentum"},
      {"train.batch_size", "128", "mini-batch size"},
      {"train.lr_drop_factor", "0.5", "learning-rate multiplier per period"},
      {"train.lr_drop_period", "10", "epochs per learning-rate drop"},
      {"train.patience", "3", "epochs without validation improvement before stopping"},
      {"train.max_epochs", "100", "epoch limit"},
      {"train.seed", "1", "initialization, shuffling and dropout seed"},
      {"train.train_fraction", "0.8", "share of the dataset used for training"},
      {"train.threads", "0", "networks trained in parallel (0 = all cores)"},
      {"net.filters", "256", "filters per conv layer"},
      {"net.fc_width", "1024", "hidden fully connected width"},
      {"net.dropout", "0.5", "dropout probability"},
      {"model.path", "model.dmmb", "model bundle file"},
      {"eval.sources", "2", "sources per evaluation trial"},
      {"eval.snapshots", "100", "snapshots per evaluation trial"},
      {"eval.trials", "100", "Monte-Carlo trials per sweep point"},
      {"eval.snr_db", "0,10,20,30", "SNR sweep"},
      {"eval.rho", "0,0.25,0.5,0.75,1", "correlation sweep"},
      {"eval.corr_snr_db", "20", "SNR of the correlation sweep"},
      {"eval.seed", "1", "evaluation seed"},
      {"eval.methods", "deepmusic,spectral_music,root_music", "methods to run"},
      {"eval.doas", "", "fixed DOAs in degrees (empty = random regions)"},
      {"eval.doa_jitter_deg", "0", "shared uniform offset added to fixed DOAs"},
      {"eval.guard_steps", "2", "edge guard for random DOAs"},
      {"eval.smoothing_subarray", "0", "smoothing subarray size (0 = M - K)"},
      {"time.repetitions", "50", "timed repetitions per method"},
      {"time.warmup", "5", "untimed warm-up runs"},
      {"time.snr_db", "20", "SNR of the timing input"},
      {"time.grid_points", "", "grid sizes to time (empty = grid.points)"},
      {"output.csv", "", "CSV output file (empty = stdout)"},
      {"output.timing", "false", "fill runtime_s in RMSE tables"},
      {"output.spectrum", "", "spectrum dump file for eval"},
  };
  return keys;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* expected) {
  fail(ErrorCode::Config, "config key '" + key + "': cannot parse '" + value + "' as " + expected);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text, const char* expected) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) bad_value(key, text, expected);
  return value;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

/// Rethrows argument errors from typed config validation as config errors.
template <typename Fn>
auto as_config_error(Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument) throw;
    fail(ErrorCode::Config, std::string("invalid configuration: ") + e.what());
  }
}

}  // namespace

std::string env_name(const std::string& key) {
  std::string out = "DEEPMUSIC_";
  for (char c : key) out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

Config::Config() {
  for (const auto& k : config_keys()) values_[k.name] = k.default_value;
}

void Config::set(const std::string& key, const std::string& value) {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::Config, "unknown config key '" + key + "'");
  it->second = trim(value);
}

void Config::set_assignment(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) fail(ErrorCode::Config, "expected key=value, got '" + assignment + "'");
  set(trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

void Config::parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      fail(ErrorCode::Config, source + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (!values_.count(key))
      fail(ErrorCode::Config, source + ":" + std::to_string(number) + ": unknown config key '" + key + "'");
    set(key, line.substr(eq + 1));
  }
}

void Config::load_file(const std::string& path) {
  const auto bytes = io::read_file(path);
  parse(std::string(bytes.begin(), bytes.end()), path);
}

void Config::apply_env(char** envp) {
  if (!envp) return;
  std::map<std::string, std::string> by_env;
  for (const auto& [key, value] : values_) by_env[env_name(key)] = key;
  for (char** e = envp; *e; ++e) {
    const std::string entry(*e);
    const auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    const std::string name = entry.substr(0, eq);
    if (name.rfind("DEEPMUSIC_", 0) != 0) continue;
    const auto it = by_env.find(name);
    if (it == by_env.end()) fail(ErrorCode::Config, "unknown config environment variable " + name);
    set(it->second, entry.substr(eq + 1));
  }
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) fail(ErrorCode::Config, "unknown config key '" + key + "'");
  return it->second;
}

long long Config::get_int(const std::string& key) const { return parse_number<long long>(key, get(key), "an integer"); }

std::uint64_t Config::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key), "an unsigned integer");
}

double Config::get_double(const std::string& key) const {
  const double v = parse_number<double>(key, get(key), "a number");
  if (!std::isfinite(v)) bad_value(key, get(key), "a finite number");
  return v;
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad_value(key, v, "a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : split_list(get(key))) {
    const double v = parse_number<double>(key, item, "a list of numbers");
    if (!std::isfinite(v)) bad_value(key, item, "a finite number");
    out.push_back(v);
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& key) const {
  std::vector<int> out;
  for (const auto& item : split_list(get(key))) out.push_back(parse_number<int>(key, item, "a list of integers"));
  return out;
}

namespace {

int as_int(const Config& c, const std::string& key) {
  const long long v = c.get_int(key);
  if (v < -(1ll << 31) || v >= (1ll << 31)) bad_value(key, c.get(key), "a 32-bit integer");
  return static_cast<int>(v);
}

}  // namespace

ArrayConfig Config::array() const {
  ArrayConfig a{as_int(*this, "array.elements"), get_double("array.spacing")};
  as_config_error([&] {
    a.validate();
    return 0;
  });
  return a;
}

DatasetConfig Config::dataset() const {
  DatasetConfig d;
  d.j_alpha = as_int(*this, "data.j_alpha");
  d.j_beta = as_int(*this, "data.j_beta");
  d.num_snapshots = as_int(*this, "data.snapshots");
  d.snr_train_db = get_doubles("data.snr_db");
  d.num_sources = as_int(*this, "data.sources");
  d.num_regions = as_int(*this, "grid.regions");
  d.seed = get_u64("data.seed");
  d.guard_steps = as_int(*this, "data.guard_steps");
  as_config_error([&] {
    d.grid = make_grid(get_double("grid.start_deg"), get_double("grid.final_deg"), as_int(*this, "grid.points"));
    d.validate();
    return 0;
  });
  return d;
}

nn::TrainConfig Config::train() const {
  nn::TrainConfig t;
  t.learning_rate = get_double("train.learning_rate");
  t.momentum = get_double("train.momentum");
  t.batch_size = as_int(*this, "train.batch_size");
  t.lr_drop_factor = get_double("train.lr_drop_factor");
  t.lr_drop_period = as_int(*this, "train.lr_drop_period");
  t.patience = as_int(*this, "train.patience");
  t.max_epochs = as_int(*this, "train.max_epochs");
  t.seed = get_u64("train.seed");
  as_config_error([&] {
    t.validate();
    return 0;
  });
  return t;
}

double Config::train_fraction() const {
  const double f = get_double("train.train_fraction");
  if (!(f > 0.0 && f < 1.0)) bad_value("train.train_fraction", get("train.train_fraction"), "a fraction in (0, 1)");
  return f;
}

NetConfig Config::net() const {
  NetConfig n{as_int(*this, "net.filters"), as_int(*this, "net.fc_width"), get_double("net.dropout")};
  as_config_error([&] {
    n.validate();
    return 0;
  });
  return n;
}

bench::EvalConfig Config::eval() const {
  bench::EvalConfig e;
  e.array = array();
  e.num_regions = as_int(*this, "grid.regions");
  e.num_sources = as_int(*this, "eval.sources");
  e.num_snapshots = as_int(*this, "eval.snapshots");
  e.trials = as_int(*this, "eval.trials");
  e.snr_db = get_doubles("eval.snr_db");
  e.rho = get_doubles("eval.rho");
  e.corr_snr_db = get_double("eval.corr_snr_db");
  e.seed = get_u64("eval.seed");
  e.doas_deg = get_doubles("eval.doas");
  e.doa_jitter_deg = get_double("eval.doa_jitter_deg");
  e.guard_steps = as_int(*this, "eval.guard_steps");
  e.smoothing_subarray = as_int(*this, "eval.smoothing_subarray");
  e.methods = bench::parse_methods(get("eval.methods"));
  as_config_error([&] {
    e.grid = make_grid(get_double("grid.start_deg"), get_double("grid.final_deg"), as_int(*this, "grid.points"));
    e.validate();
    return 0;
  });
  return e;
}

bench::TimingConfig Config::timing() const {
  bench::TimingConfig t;
  t.repetitions = as_int(*this, "time.repetitions");
  t.warmup = as_int(*this, "time.warmup");
  t.snr_db = get_double("time.snr_db");
  t.grid_points = get_ints("time.grid_points");
  if (t.repetitions < 2) bad_value("time.repetitions", get("time.repetitions"), "an integer >= 2");
  if (t.warmup < 0) bad_value("time.warmup", get("time.warmup"), "an integer >= 0");
  for (int n : t.grid_points)
    if (n < 2) bad_value("time.grid_points", get("time.grid_points"), "grid sizes >= 2");
  return t;
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace dm
