#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cvse/model/cvse_model.hpp"

namespace cvse::model {

/// A retrieval candidate: one representative sentence per finding group.
struct Candidate {
  std::uint32_t group_id = 0;
  std::uint64_t sentence_id = 0;
  std::string text;
  num::Vector embedding;
};

struct RetrievedItem {
  std::uint32_t group_id = 0;
  std::uint64_t sentence_id = 0;
  double score = 0.0;
  num::Matrix frontal_attention;  // height x width, empty when not requested
  num::Matrix lateral_attention;
};

struct RetrievalResult {
  std::vector<RetrievedItem> items;  // scores non-increasing
};

/// d*(a, I) for every candidate, in candidate order.
std::vector<double> score_candidates(const CvseModel& model, const Study& study,
                                     std::span<const Candidate> candidates);

/// Top-k candidates by d*, ties broken by ascending group id. Throws
/// UsageError on an empty pool, k == 0 or k > pool size.
RetrievalResult retrieve(const CvseModel& model, const Study& study, std::span<const Candidate> candidates,
                         std::size_t k, bool with_attention = true);

/// Indices of the k best scores (descending), ties by ascending `group_ids`.
std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const std::uint32_t> group_ids,
                               std::size_t k);

}  // namespace cvse::model
