#include "cvse/eval/nlg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "cvse/errors.hpp"
#include "cvse/text/stem.hpp"

namespace cvse::eval {

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, std::size_t> ngram_counts(std::span<const std::string> tokens, std::size_t n) {
  std::map<Ngram, std::size_t> counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) ++counts[Ngram(tokens.begin() + i, tokens.begin() + i + n)];
  return counts;
}

void check_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references, const char* name) {
  if (candidates.size() != references.size()) throw UsageError(std::string(name) + ": corpus sizes differ");
  if (candidates.empty()) throw UsageError(std::string(name) + ": empty corpus");
}

}  // namespace

double bleu(std::span<const Tokens> candidates, std::span<const Tokens> references, std::size_t max_n) {
  check_corpus(candidates, references, "bleu");
  if (max_n < 1 || max_n > 4) throw UsageError("bleu: max_n must lie in 1..4");
  std::size_t c = 0, r = 0;
  std::vector<double> clipped(max_n, 0.0), total(max_n, 0.0);
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    c += candidates[i].size();
    r += references[i].size();
    for (std::size_t n = 1; n <= max_n; ++n) {
      const auto cand = ngram_counts(candidates[i], n);
      const auto ref = ngram_counts(references[i], n);
      for (const auto& [gram, count] : cand) {
        auto it = ref.find(gram);
        clipped[n - 1] += static_cast<double>(std::min(count, it == ref.end() ? 0 : it->second));
        total[n - 1] += static_cast<double>(count);
      }
    }
  }
  if (c == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < max_n; ++n) {
    if (clipped[n] == 0.0) return 0.0;
    log_sum += std::log(clipped[n] / total[n]);
  }
  const double bp = c < r ? std::exp(1.0 - static_cast<double>(r) / static_cast<double>(c)) : 1.0;
  return bp * std::exp(log_sum / static_cast<double>(max_n));
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference, double beta) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double p = lcs / static_cast<double>(candidate.size());
  const double r = lcs / static_cast<double>(reference.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

double rouge_l_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references, double beta) {
  check_corpus(candidates, references, "rouge_l");
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += rouge_l(candidates[i], references[i], beta);
  return total / static_cast<double>(candidates.size());
}

MeteorAlignment meteor_align(std::span<const std::string> candidate, std::span<const std::string> reference) {
  constexpr std::size_t none = std::numeric_limits<std::size_t>::max();
  MeteorAlignment a;
  a.to_reference.assign(candidate.size(), none);
  std::vector<bool> used(reference.size(), false);

  auto stage = [&](auto&& matches) {
    for (std::size_t i = 0; i < candidate.size(); ++i) {
      if (a.to_reference[i] != none) continue;
      const std::size_t prefer = i > 0 && a.to_reference[i - 1] != none ? a.to_reference[i - 1] + 1 : none;
      std::size_t pick = none;
      if (prefer < reference.size() && !used[prefer] && matches(candidate[i], reference[prefer])) {
        pick = prefer;
      } else {
        for (std::size_t j = 0; j < reference.size(); ++j) {
          if (!used[j] && matches(candidate[i], reference[j])) {
            pick = j;
            break;
          }
        }
      }
      if (pick != none) {
        a.to_reference[i] = pick;
        used[pick] = true;
      }
    }
  };
  stage([](const std::string& x, const std::string& y) { return x == y; });
  stage([](const std::string& x, const std::string& y) { return text::stem_match(x, y); });

  std::size_t prev = none;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    const std::size_t j = a.to_reference[i];
    if (j == none) {
      prev = none;
      continue;
    }
    ++a.matches;
    if (prev == none || j != prev + 1) ++a.chunks;
    prev = j;
  }
  return a;
}

double meteor(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const MeteorAlignment a = meteor_align(candidate, reference);
  if (a.matches == 0) return 0.0;
  const double m = static_cast<double>(a.matches);
  const double p = m / static_cast<double>(candidate.size());
  const double r = m / static_cast<double>(reference.size());
  const double fmean = 10.0 * p * r / (r + 9.0 * p);
  const double frag = static_cast<double>(a.chunks) / m;
  return fmean * (1.0 - 0.5 * frag * frag * frag);
}

double meteor_corpus(std::span<const Tokens> candidates, std::span<const Tokens> references) {
  check_corpus(candidates, references, "meteor");
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += meteor(candidates[i], references[i]);
  return total / static_cast<double>(candidates.size());
}

}  // namespace cvse::eval
