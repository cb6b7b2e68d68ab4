#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

namespace cvse::pipeline {

/// Flat key=value settings. Blank lines and '#' comments are ignored.
class ConfigMap {
 public:
  ConfigMap() = default;
  static ConfigMap parse(const std::string& text);
  /// Loads a file and remembers its directory for resolving relative paths.
  static ConfigMap load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }
  /// Applies every entry of `overrides` on top of this map.
  void merge(const ConfigMap& overrides);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  double get_real(const std::string& key, double fallback) const;
  /// Path value resolved against the config file's directory.
  std::filesystem::path get_path(const std::string& key, const std::filesystem::path& fallback) const;

  const std::filesystem::path& base_dir() const { return base_; }
  void set_base_dir(std::filesystem::path base) { base_ = std::move(base); }
  const std::map<std::string, std::string>& values() const { return values_; }

  /// Throws UsageError for keys outside the known set.
  void check_known_keys() const;

 private:
  std::map<std::string, std::string> values_;
  std::filesystem::path base_;
};

/// Every recognised configuration key.
const std::map<std::string, std::string>& config_keys();

/// Settings for cluster/train/retrieve/eval/export-attention.
struct RunConfig {
  std::size_t d1 = 64;
  std::size_t d2 = 1024;
  std::size_t d = 512;
  std::size_t d_att = 0;  // 0 = same as d
  double margin = 0.2;
  std::size_t negatives = 8;
  std::size_t batch_size = 32;
  std::size_t epochs = 40;
  double lr = 0.001;
  std::size_t clusters = 500;
  std::size_t kmeans_restarts = 5;
  std::size_t kmeans_iters = 100;
  std::size_t k = 3;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::string embedder = "hash";
  std::filesystem::path embedder_base;

  std::filesystem::path out = ".";
  std::filesystem::path manifest;
  std::filesystem::path groups;
  std::filesystem::path gold;
  std::filesystem::path checkpoint;
  std::filesystem::path predictions;
  std::filesystem::path keywords;  // empty = built-in table

  /// Validates counts and ranges; output paths default into `out`.
  static RunConfig from(const ConfigMap& map);
};

}  // namespace cvse::pipeline
