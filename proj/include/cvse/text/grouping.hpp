#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvse/num/tensor.hpp"
#include "cvse/text/mutex.hpp"

namespace cvse::text {

struct FindingGroup {
  std::uint32_t group_id = 0;
  std::size_t cluster_id = 0;
  std::vector<std::uint64_t> members;  // sentence ids, input order
  MutexPattern pattern;
  std::uint64_t representative = 0;
};

/// Splits every K-Means cluster into subgroups of identical mutex pattern.
///
/// Inputs are parallel arrays over the abnormal sentences. Clusters are
/// visited in ascending id; within a cluster, subgroups are ordered by the
/// first member's input position; group ids are assigned consecutively from 0.
/// Representatives are left at the first member; see `assign_representatives`.
std::vector<FindingGroup> refine_groups(std::span<const std::size_t> clusters,
                                        std::span<const MutexPattern> patterns,
                                        std::span<const std::uint64_t> sentence_ids);

/// Medoid of a group: the member with the smallest summed squared distance
/// to the other members, ties to the lowest sentence id. `embeddings` is
/// parallel to `members`. Throws UsageError on an empty group.
std::uint64_t group_representative(std::span<const std::uint64_t> members, std::span<const num::Vector> embeddings);

}  // namespace cvse::text
