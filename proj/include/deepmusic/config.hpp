#pragma once

// Plain-text key=value configuration shared by every CLI command. Lines are
// "key = value"; '#' starts a comment. Unknown keys are errors. Any key can
// be overridden from the environment as DEEPMUSIC_<KEY> with dots replaced
// by underscores and letters upper-cased (data.snr_db -> DEEPMUSIC_DATA_SNR_DB).

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "deepmusic/bench.hpp"
#include "deepmusic/datagen.hpp"
#include "deepmusic/estimator.hpp"
#include "deepmusic/nn/trainer.hpp"

namespace dm {

struct ConfigKey {
  const char* name;
  const char* default_value;
  const char* help;
};

/// Every recognized key with its default.
const std::vector<ConfigKey>& config_keys();

class Config {
 public:
  Config();

  void set(const std::string& key, const std::string& value);
  /// Parses "key=value" or fails naming the text.
  void set_assignment(const std::string& assignment);
  void load_file(const std::string& path);
  void parse(const std::string& text, const std::string& source);
  /// Applies DEEPMUSIC_* variables from envp (null-terminated).
  void apply_env(char** envp);

  const std::string& get(const std::string& key) const;
  std::string get_string(const std::string& key) const { return get(key); }
  long long get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<int> get_ints(const std::string& key) const;

  ArrayConfig array() const;
  DatasetConfig dataset() const;
  nn::TrainConfig train() const;
  NetConfig net() const;
  bench::EvalConfig eval() const;
  bench::TimingConfig timing() const;
  double train_fraction() const;

  /// All keys in sorted order as key=value lines.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Environment variable name for a key.
std::string env_name(const std::string& key);

}  // namespace dm
