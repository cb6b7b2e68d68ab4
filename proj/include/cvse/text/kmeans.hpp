#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "cvse/num/tensor.hpp"

namespace cvse::text {

struct KMeansOptions {
  std::size_t k = 1;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;
  /// Independent k-means++ initializations; the lowest final inertia wins.
  std::size_t restarts = 1;
};

struct KMeansResult {
  std::vector<std::size_t> assignments;
  std::vector<num::Vector> centroids;
  double inertia = 0.0;
  /// Inertia after every assignment step of the winning run, then the final value.
  std::vector<double> inertia_history;
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding. Stops when assignments are
/// stable or after `max_iters` assignment steps. An emptied cluster is
/// re-seeded at the point farthest from its current centroid. Ties in the
/// assignment step go to the lowest cluster index. Throws UsageError when
/// k is 0 or exceeds the number of points.
KMeansResult kmeans(std::span<const num::Vector> points, const KMeansOptions& options);

}  // namespace cvse::text
