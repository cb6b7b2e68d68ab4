#include "cvse/pipeline/config.hpp"

#include <charconv>
#include <sstream>

#include "cvse/errors.hpp"
#include "cvse/pipeline/binary_io.hpp"

namespace cvse::pipeline {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return value;
}

}  // namespace

const std::map<std::string, std::string>& config_keys() {
  static const std::map<std::string, std::string> keys{
      {"d1", "sentence embedding dimension"},
      {"d2", "feature-map channel count"},
      {"d", "joint embedding dimension"},
      {"d_att", "attention hidden size (0 = d)"},
      {"margin", "triplet margin"},
      {"negatives", "negatives per anchor and direction"},
      {"batch_size", "training batch size"},
      {"epochs", "training epochs"},
      {"lr", "Adam learning rate"},
      {"clusters", "K-Means cluster count"},
      {"kmeans_restarts", "K-Means initializations"},
      {"kmeans_iters", "K-Means iteration cap"},
      {"k", "retrieval depth and recall@k"},
      {"seed", "random seed"},
      {"threshold", "abnormal-sentence probability threshold"},
      {"embedder", "hash | table:<path> | precomputed:<path>"},
      {"out", "output directory"},
      {"manifest", "dataset manifest (JSON lines)"},
      {"groups", "group file (default <out>/groups.jsonl)"},
      {"gold", "gold file (default <out>/gold.jsonl)"},
      {"checkpoint", "model checkpoint (default <out>/checkpoint.cvse)"},
      {"predictions", "predictions file (default <out>/predictions.jsonl)"},
      {"keywords", "disease keyword table (JSON); built-in when unset"},
      {"concepts", "synthetic: concept count"},
      {"train_studies", "synthetic: train studies"},
      {"dev_studies", "synthetic: dev studies"},
      {"test_studies", "synthetic: test studies"},
      {"width", "synthetic: feature-map width"},
      {"height", "synthetic: feature-map height"},
      {"noise", "synthetic: noise sigma"},
      {"variants", "synthetic: modifier variants per concept (1-3)"},
      {"block", "synthetic: planted block side length"},
      {"max_findings", "synthetic: maximum findings per study"},
  };
  return keys;
}

ConfigMap ConfigMap::parse(const std::string& text) {
  ConfigMap map;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError("config line " + std::to_string(line_no) + ": empty key");
    map.values_[key] = trim(line.substr(eq + 1));
  }
  return map;
}

ConfigMap ConfigMap::load(const std::filesystem::path& path) {
  ConfigMap map = parse(io::read_text(path));
  map.base_ = path.parent_path();
  return map;
}

void ConfigMap::merge(const ConfigMap& overrides) {
  for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

void ConfigMap::check_known_keys() const {
  for (const auto& [k, v] : values_) {
    if (config_keys().count(k) == 0) throw UsageError("unknown config key '" + k + "'");
  }
}

std::string ConfigMap::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

std::size_t ConfigMap::get_count(const std::string& key, std::size_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::size_t>(key, it->second);
}

std::uint64_t ConfigMap::get_u64(const std::string& key, std::uint64_t fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<std::uint64_t>(key, it->second);
}

double ConfigMap::get_real(const std::string& key, double fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number<double>(key, it->second);
}

std::filesystem::path ConfigMap::get_path(const std::string& key, const std::filesystem::path& fallback) const {
  auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::filesystem::path p(it->second);
  return p.is_relative() && !base_.empty() ? base_ / p : p;
}

RunConfig RunConfig::from(const ConfigMap& map) {
  map.check_known_keys();
  RunConfig c;
  c.d1 = map.get_count("d1", c.d1);
  c.d2 = map.get_count("d2", c.d2);
  c.d = map.get_count("d", c.d);
  c.d_att = map.get_count("d_att", c.d_att);
  c.margin = map.get_real("margin", c.margin);
  c.negatives = map.get_count("negatives", c.negatives);
  c.batch_size = map.get_count("batch_size", c.batch_size);
  c.epochs = map.get_count("epochs", c.epochs);
  c.lr = map.get_real("lr", c.lr);
  c.clusters = map.get_count("clusters", c.clusters);
  c.kmeans_restarts = map.get_count("kmeans_restarts", c.kmeans_restarts);
  c.kmeans_iters = map.get_count("kmeans_iters", c.kmeans_iters);
  c.k = map.get_count("k", c.k);
  c.seed = map.get_u64("seed", c.seed);
  c.threshold = map.get_real("threshold", c.threshold);
  c.embedder = map.get_string("embedder", c.embedder);
  c.embedder_base = map.base_dir();
  c.out = map.get_path("out", c.out);
  c.manifest = map.get_path("manifest", {});
  c.groups = map.get_path("groups", c.out / "groups.jsonl");
  c.gold = map.get_path("gold", c.out / "gold.jsonl");
  c.checkpoint = map.get_path("checkpoint", c.out / "checkpoint.cvse");
  c.predictions = map.get_path("predictions", c.out / "predictions.jsonl");
  c.keywords = map.get_path("keywords", {});

  auto positive = [](std::size_t v, const char* key) {
    if (v < 1) throw UsageError(std::string("config '") + key + "' must be at least 1");
  };
  positive(c.d1, "d1");
  positive(c.d2, "d2");
  positive(c.d, "d");
  positive(c.negatives, "negatives");
  positive(c.batch_size, "batch_size");
  positive(c.clusters, "clusters");
  positive(c.kmeans_restarts, "kmeans_restarts");
  positive(c.kmeans_iters, "kmeans_iters");
  positive(c.k, "k");
  if (!(c.margin > 0.0)) throw UsageError("config 'margin' must be positive");
  if (!(c.lr > 0.0)) throw UsageError("config 'lr' must be positive");
  if (!(c.threshold > 0.0 && c.threshold <= 1.0)) throw UsageError("config 'threshold' must lie in (0, 1]");
  return c;
}

}  // namespace cvse::pipeline
