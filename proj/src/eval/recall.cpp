#include "cvse/eval/recall.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "cvse/errors.hpp"

namespace cvse::eval {

double recall_at_k(std::span<const std::vector<std::uint32_t>> retrieved,
                   std::span<const std::vector<std::uint32_t>> gold, std::size_t k) {
  if (retrieved.size() != gold.size()) throw UsageError("recall_at_k: retrieved and gold lists are misaligned");
  if (k == 0) throw UsageError("recall_at_k: k must be at least 1");
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const std::set<std::uint32_t> truth(gold[i].begin(), gold[i].end());
    if (truth.empty()) continue;
    if (retrieved[i].size() < k) {
      throw UsageError("recall_at_k: study " + std::to_string(i) + " has fewer than k retrieved entries");
    }
    // Duplicate retrieved ids count once.
    const std::set<std::uint32_t> top(retrieved[i].begin(), retrieved[i].begin() + static_cast<std::ptrdiff_t>(k));
    const auto hits = std::count_if(truth.begin(), truth.end(), [&](std::uint32_t g) { return top.count(g) > 0; });
    total += static_cast<double>(hits) / static_cast<double>(truth.size());
    ++counted;
  }
  if (counted == 0) throw UsageError("recall_at_k: every gold set is empty");
  return total / static_cast<double>(counted);
}

}  // namespace cvse::eval
