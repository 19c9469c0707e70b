#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace painet::cli {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitProperty = 4;

/// Resolved settings for one command run: defaults overlaid by the config
/// file, overlaid by explicit flags. Every run snapshots itself (plus the
/// seed) into the output directory so it can be reproduced from that file
/// alone.
struct RunConfig {
  std::string command;
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> values;  // dotted keys

  bool has(const std::string& key) const { return values.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_size(const std::string& key, std::size_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
};

/// Flat key=value lines, '#' comments, dotted namespaces.
std::map<std::string, std::string> parse_config_file(const std::string& path);

/// seed_flag empty -> config file "seed" -> PAINET_SEED env -> 0.
RunConfig make_run_config(std::string command, const std::string& config_path,
                          const std::map<std::string, std::string>& overrides,
                          const std::string& out_dir, const std::string& seed_flag);

void write_resolved_config(const RunConfig& rc);

int run_generate(const RunConfig& rc);
int run_train(const RunConfig& rc);
int run_eval(const RunConfig& rc);
int run_verify(const RunConfig& rc);

/// Executes the command named in rc, mapping exceptions to exit codes
/// (1 I/O, 2 usage, 3 numeric failure, 4 property failure).
int dispatch(const RunConfig& rc);

}  // namespace painet::cli
