#pragma once

#include <span>
#include <string>
#include <vector>

namespace cvse::eval {

using Tokens = std::vector<std::string>;

/// Corpus BLEU with one reference per candidate: geometric mean of the
/// clipped n-gram precisions for n = 1..max_n, pooled over the corpus, times
/// the brevity penalty exp(1 - r/c) when c < r. Zero if any precision is zero.
/// Throws UsageError on an empty or misaligned corpus or max_n outside 1..4.
double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n);

/// Length of the longest common subsequence.
std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

/// LCS F-measure (1 + b^2) P R / (R + b^2 P). Zero for empty input or no overlap.
double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference, double beta = 1.2);
double rouge_l_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references, double beta = 1.2);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  /// reference index aligned to each candidate token, or npos.
  std::vector<std::size_t> to_reference;
};

/// Greedy two-stage unigram alignment: exact matches first, then stem
/// matches among the leftovers. Each candidate token prefers the reference
/// position right after its predecessor's, which keeps chunks few.
MeteorAlignment meteor_align(std::span<const std::string> candidate, std::span<const std::string> reference);

/// Fmean = 10PR / (R + 9P); penalty = 0.5 (chunks / matches)^3; score = Fmean (1 - penalty).
/// No synonym stage. Zero for empty input or no matches.
double meteor(std::span<const std::string> candidate, std::span<const std::string> reference);
double meteor_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references);

}  // namespace cvse::eval
