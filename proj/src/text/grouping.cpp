#include "cvse/text/grouping.hpp"

#include <limits>
#include <map>

#include "cvse/errors.hpp"

namespace cvse::text {

std::vector<FindingGroup> refine_groups(std::span<const std::size_t> clusters,
                                        std::span<const MutexPattern> patterns,
                                        std::span<const std::uint64_t> sentence_ids) {
  if (clusters.size() != patterns.size() || clusters.size() != sentence_ids.size()) {
    throw ShapeError("refine_groups: clusters, patterns and ids must be parallel");
  }
  std::map<std::size_t, std::vector<std::size_t>> by_cluster;
  for (std::size_t i = 0; i < clusters.size(); ++i) by_cluster[clusters[i]].push_back(i);

  std::vector<FindingGroup> groups;
  for (const auto& [cluster, indices] : by_cluster) {
    std::map<unsigned long, std::size_t> slot;  // pattern key -> index into groups
    for (std::size_t i : indices) {
      auto [it, inserted] = slot.try_emplace(patterns[i].key(), groups.size());
      if (inserted) {
        FindingGroup g;
        g.group_id = static_cast<std::uint32_t>(groups.size());
        g.cluster_id = cluster;
        g.pattern = patterns[i];
        g.representative = sentence_ids[i];
        groups.push_back(std::move(g));
      }
      groups[it->second].members.push_back(sentence_ids[i]);
    }
  }
  return groups;
}

std::uint64_t group_representative(std::span<const std::uint64_t> members, std::span<const num::Vector> embeddings) {
  if (members.empty()) throw UsageError("group_representative: empty group");
  if (members.size() != embeddings.size()) throw ShapeError("group_representative: members and embeddings differ");
  std::uint64_t best_id = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < members.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (i != j) total += num::sq_l2_distance(embeddings[i], embeddings[j]);
    }
    if (total < best || (total == best && members[i] < best_id)) {
      best = total;
      best_id = members[i];
    }
  }
  return best_id;
}

}  // namespace cvse::text
