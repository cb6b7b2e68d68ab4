#include "cvse/text/embedder.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"

namespace cvse::text {

namespace {

std::uint64_t token_hash(const std::string& token) { return num::fnv1a64(token.data(), token.size()); }

void require_tokens(const Sentence& s) {
  if (s.tokens.empty()) throw UsageError("cannot embed a sentence without tokens: '" + s.text + "'");
}

std::size_t uniform_dim(const std::unordered_map<std::string, num::Vector>& table, const char* what) {
  if (table.empty()) throw DataError(std::string(what) + " is empty");
  const std::size_t d = table.begin()->second.dim();
  for (const auto& [key, v] : table) {
    if (v.dim() != d || d == 0) throw DataError(std::string(what) + ": entry '" + key + "' has inconsistent dim");
  }
  return d;
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dim) : dim_(dim) {
  if (dim_ == 0) throw UsageError("hash embedder dim must be positive");
}

num::Vector HashEmbedder::embed(const Sentence& sentence) const {
  require_tokens(sentence);
  num::Vector v(dim_);
  for (const std::string& t : sentence.tokens) v[token_hash(t) % dim_] += 1.0;
  return num::l2_normalize(v);
}

TableEmbedder::TableEmbedder(std::unordered_map<std::string, num::Vector> table)
    : table_(std::move(table)), dim_(uniform_dim(table_, "embedding table")) {}

TableEmbedder TableEmbedder::load(const std::filesystem::path& path) { return TableEmbedder(read_vector_table(path)); }

num::Vector TableEmbedder::token_vector(const std::string& token) const {
  if (auto it = table_.find(token); it != table_.end()) return it->second;
  num::Rng rng(token_hash(token));
  num::Vector v(dim_);
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim_));
  for (std::size_t i = 0; i < dim_; ++i) v[i] = rng.uniform(-scale, scale);
  return v;
}

num::Vector TableEmbedder::embed(const Sentence& sentence) const {
  require_tokens(sentence);
  num::Vector sum(dim_);
  for (const std::string& t : sentence.tokens) {
    const num::Vector tv = token_vector(t);
    for (std::size_t i = 0; i < dim_; ++i) sum[i] += tv[i];
  }
  for (std::size_t i = 0; i < dim_; ++i) sum[i] /= static_cast<double>(sentence.tokens.size());
  return sum;
}

PrecomputedEmbedder::PrecomputedEmbedder(std::unordered_map<std::string, num::Vector> vectors)
    : vectors_(std::move(vectors)), dim_(uniform_dim(vectors_, "sentence vector file")) {}

PrecomputedEmbedder PrecomputedEmbedder::load(const std::filesystem::path& path) {
  return PrecomputedEmbedder(read_vector_table(path));
}

num::Vector PrecomputedEmbedder::embed(const Sentence& sentence) const {
  require_tokens(sentence);
  const std::string key = sentence_key(sentence);
  auto it = vectors_.find(key);
  if (it == vectors_.end()) throw LookupError("no precomputed vector for sentence " + key);
  return it->second;
}

std::unordered_map<std::string, num::Vector> read_vector_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vector table " + path.string());
  std::unordered_map<std::string, num::Vector> table;
  std::string line;
  std::size_t line_no = 0, dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    std::vector<double> values;
    std::string tok;
    while (fields >> tok) {
      double x = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
      if (ec != std::errc() || ptr != tok.data() + tok.size() || !std::isfinite(x)) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + tok + "'");
      }
      values.push_back(x);
    }
    if (values.empty()) throw DataError(path.string() + ":" + std::to_string(line_no) + ": no values");
    if (dim == 0) dim = values.size();
    if (values.size() != dim) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(dim) +
                      " values, got " + std::to_string(values.size()));
    }
    table.insert_or_assign(key, num::Vector(std::move(values)));
  }
  return table;
}

void write_vector_table(const std::filesystem::path& path, const std::map<std::string, num::Vector>& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  char buf[64];
  for (const auto& [key, v] : table) {
    out << key;
    for (double x : v.span()) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      out << ' ' << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
    }
    out << '\n';
  }
}

std::unique_ptr<SentenceEmbedder> make_embedder(const std::string& kind, std::size_t dim,
                                                const std::filesystem::path& base) {
  auto resolve = [&](std::string_view p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
  };
  std::unique_ptr<SentenceEmbedder> e;
  if (kind == "hash") {
    e = std::make_unique<HashEmbedder>(dim);
  } else if (kind.starts_with("table:")) {
    e = std::make_unique<TableEmbedder>(TableEmbedder::load(resolve(std::string_view(kind).substr(6))));
  } else if (kind.starts_with("precomputed:")) {
    e = std::make_unique<PrecomputedEmbedder>(PrecomputedEmbedder::load(resolve(std::string_view(kind).substr(12))));
  } else {
    throw UsageError("unknown embedder '" + kind + "' (expected hash, table:<path> or precomputed:<path>)");
  }
  if (e->dim() != dim) {
    throw DataError("embedder '" + kind + "' has dim " + std::to_string(e->dim()) + ", config d1 is " +
                    std::to_string(dim));
  }
  return e;
}

}  // namespace cvse::text
