#include "cvse/text/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"

namespace cvse::text {

namespace {

using num::Vector;

std::vector<Vector> seed_plus_plus(std::span<const Vector> points, std::size_t k, num::Rng& rng) {
  const std::size_t n = points.size();
  std::vector<Vector> centers;
  std::vector<bool> chosen(n, false);
  std::size_t first = static_cast<std::size_t>(rng.below(n));
  centers.push_back(points[first]);
  chosen[first] = true;

  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], num::sq_l2_distance(points[i], centers.back()));
      total += d2[i];
    }
    std::size_t pick = n;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        acc += d2[i];
        if (d2[i] > 0.0 && acc > target) {
          pick = i;
          break;
        }
      }
      if (pick == n) {
        // Rounding left the target past the last positive weight.
        for (std::size_t i = n; i-- > 0;) {
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
        }
      }
    } else {
      // All remaining points coincide with a center; take an unused index.
      std::vector<std::size_t> free;
      for (std::size_t i = 0; i < n; ++i) {
        if (!chosen[i]) free.push_back(i);
      }
      pick = free[rng.below(free.size())];
    }
    chosen[pick] = true;
    centers.push_back(points[pick]);
  }
  return centers;
}

std::size_t nearest(const Vector& p, const std::vector<Vector>& centroids, double& best) {
  std::size_t arg = 0;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = num::sq_l2_distance(p, centroids[c]);
    if (d < best) {
      best = d;
      arg = c;
    }
  }
  return arg;
}

double inertia_of(std::span<const Vector> points, const std::vector<std::size_t>& assign,
                  const std::vector<Vector>& centroids) {
  double total = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) total += num::sq_l2_distance(points[i], centroids[assign[i]]);
  return total;
}

// Means of the assigned points; clusters left empty are re-seeded at the
// points farthest from their current centroids.
void update_centroids(std::span<const Vector> points, std::vector<std::size_t>& assign,
                      std::vector<Vector>& centroids) {
  const std::size_t k = centroids.size(), dim = points[0].dim();
  std::vector<Vector> sums(k, Vector(dim));
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    ++counts[assign[i]];
    for (std::size_t j = 0; j < dim; ++j) sums[assign[i]][j] += points[i][j];
  }
  std::vector<bool> taken(points.size(), false);
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) {
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] /= static_cast<double>(counts[c]);
      centroids[c] = sums[c];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] > 0) continue;
    std::size_t far = points.size();
    double far_d = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i] || counts[assign[i]] <= 1) continue;
      const double d = num::sq_l2_distance(points[i], centroids[assign[i]]);
      if (d > far_d) {
        far_d = d;
        far = i;
      }
    }
    if (far == points.size()) continue;
    taken[far] = true;
    --counts[assign[far]];
    assign[far] = c;
    counts[c] = 1;
    centroids[c] = points[far];
  }
}

KMeansResult run_once(std::span<const Vector> points, const KMeansOptions& options, std::uint64_t seed) {
  num::Rng rng(seed);
  KMeansResult r;
  r.centroids = seed_plus_plus(points, options.k, rng);
  r.assignments.assign(points.size(), options.k);  // sentinel: nothing assigned yet

  for (std::size_t it = 0; it < std::max<std::size_t>(options.max_iters, 1); ++it) {
    std::vector<std::size_t> next(points.size());
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double d = 0.0;
      next[i] = nearest(points[i], r.centroids, d);
      total += d;
    }
    if (!r.inertia_history.empty() && total > r.inertia_history.back() * (1.0 + 1e-12) + 1e-12) {
      throw NumericError("kmeans: inertia increased at iteration " + std::to_string(it));
    }
    r.inertia_history.push_back(total);
    r.iterations = it + 1;
    const bool stable = next == r.assignments;
    r.assignments = std::move(next);
    if (stable) break;
    update_centroids(points, r.assignments, r.centroids);
  }
  r.inertia = inertia_of(points, r.assignments, r.centroids);
  r.inertia_history.push_back(r.inertia);
  return r;
}

}  // namespace

KMeansResult kmeans(std::span<const Vector> points, const KMeansOptions& options) {
  if (options.k == 0) throw UsageError("kmeans: k must be at least 1");
  if (options.k > points.size()) {
    throw UsageError("kmeans: k=" + std::to_string(options.k) + " exceeds " + std::to_string(points.size()) +
                     " points");
  }
  const std::size_t dim = points[0].dim();
  for (const Vector& p : points) {
    if (p.dim() != dim) throw ShapeError("kmeans: points have inconsistent dimensions");
  }
  KMeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < std::max<std::size_t>(options.restarts, 1); ++r) {
    KMeansResult run = run_once(points, options, num::derive_seed(options.seed, r));
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return best;
}

}  // namespace cvse::text
