#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cvse/model/cvse_model.hpp"
#include "cvse/num/random.hpp"

namespace cvse::model {

/// Finding `finding` of study `study`.
struct FindingRef {
  std::size_t study = 0;
  std::size_t finding = 0;
  bool operator==(const FindingRef&) const = default;
};

/// One (study, positive finding) anchor with its sampled negatives.
struct TripletItem {
  FindingRef positive;
  std::vector<FindingRef> negative_findings;  // a^-: findings unmatched to the anchor study
  std::vector<std::size_t> negative_studies;  // I^-: studies unmatched to the anchor finding
};

/// Draws negatives for anchors from a fixed training pool.
///
/// A finding is a valid negative for a study when its group is not among the
/// study's gold groups; a study is a valid negative for a finding when none of
/// its gold findings share the finding's group. Sampling is uniform without
/// replacement; if fewer valid candidates exist than requested, it falls back
/// to sampling with replacement and reports that through `fell_back()`.
class NegativeSampler {
 public:
  NegativeSampler(std::span<const Study> studies, std::size_t negatives);

  TripletItem sample(FindingRef positive, num::Rng& rng);
  /// All (study, finding) anchors in pool order.
  const std::vector<FindingRef>& anchors() const { return anchors_; }

  bool fell_back() const { return fell_back_; }
  void reset_fallback_flag() { fell_back_ = false; }

 private:
  bool study_has_group(std::size_t study, std::uint32_t group) const;

  std::span<const Study> studies_;
  std::size_t negatives_;
  std::vector<FindingRef> anchors_;
  std::vector<std::vector<std::uint32_t>> study_groups_;  // sorted, unique
  bool fell_back_ = false;
};

/// Records the batch triplet loss on `graph`:
///   (1/|batch|) sum_items [ sum_{a-} [d*(a-,I) - d*(a+,I) + margin]_+
///                         + sum_{I-} [d*(a+,I-) - d*(a+,I) + margin]_+ ].
/// Throws UsageError on an empty batch.
num::Var triplet_loss(CvseGraph& graph, std::span<const Study> studies, std::span<const TripletItem> batch,
                      double margin);

/// Value of the batch triplet loss for `model`.
double triplet_loss(const CvseModel& model, std::span<const Study> studies, std::span<const TripletItem> batch);

}  // namespace cvse::model
