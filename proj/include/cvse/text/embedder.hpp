#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>

#include "cvse/num/tensor.hpp"
#include "cvse/text/sentence.hpp"

namespace cvse::text {

/// Maps a sentence to a fixed-length embedding. Identical input gives an
/// identical vector. Sentences without tokens are rejected with UsageError.
class SentenceEmbedder {
 public:
  virtual ~SentenceEmbedder() = default;
  virtual std::size_t dim() const = 0;
  virtual num::Vector embed(const Sentence& sentence) const = 0;
};

/// Feature hashing of tokens into `dim` buckets (FNV-1a), then l2-normalized.
class HashEmbedder final : public SentenceEmbedder {
 public:
  explicit HashEmbedder(std::size_t dim);
  std::size_t dim() const override { return dim_; }
  num::Vector embed(const Sentence& sentence) const override;

 private:
  std::size_t dim_;
};

/// Token lookup table; the sentence vector is the mean of its token vectors.
/// Tokens missing from the table use a deterministic pseudo-random vector
/// seeded by the token hash.
class TableEmbedder final : public SentenceEmbedder {
 public:
  explicit TableEmbedder(std::unordered_map<std::string, num::Vector> table);
  /// Text file: one entry per line, `token v1 v2 ... vd`.
  static TableEmbedder load(const std::filesystem::path& path);

  std::size_t dim() const override { return dim_; }
  num::Vector embed(const Sentence& sentence) const override;
  num::Vector token_vector(const std::string& token) const;

 private:
  std::unordered_map<std::string, num::Vector> table_;
  std::size_t dim_ = 0;
};

/// Vectors supplied per sentence, keyed by `sentence_key` ("<report_id>#<position>"),
/// in the same text format as the token table.
class PrecomputedEmbedder final : public SentenceEmbedder {
 public:
  explicit PrecomputedEmbedder(std::unordered_map<std::string, num::Vector> vectors);
  static PrecomputedEmbedder load(const std::filesystem::path& path);

  std::size_t dim() const override { return dim_; }
  num::Vector embed(const Sentence& sentence) const override;

 private:
  std::unordered_map<std::string, num::Vector> vectors_;
  std::size_t dim_ = 0;
};

/// Parses "token v1 ... vd" lines. Throws DataError on ragged or malformed rows.
std::unordered_map<std::string, num::Vector> read_vector_table(const std::filesystem::path& path);
/// Writes a table in key order with round-trip precision.
void write_vector_table(const std::filesystem::path& path, const std::map<std::string, num::Vector>& table);

/// "hash", "table:<path>" or "precomputed:<path>". Relative paths resolve
/// against `base`. `dim` is used by the hash embedder and checked for the others.
std::unique_ptr<SentenceEmbedder> make_embedder(const std::string& kind, std::size_t dim,
                                                const std::filesystem::path& base = {});

}  // namespace cvse::text
