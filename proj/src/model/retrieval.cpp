#include "cvse/model/retrieval.hpp"

#include <algorithm>
#include <numeric>

#include "cvse/errors.hpp"

namespace cvse::model {

std::vector<double> score_candidates(const CvseModel& model, const Study& study,
                                     std::span<const Candidate> candidates) {
  num::Tape tape(false);
  CvseGraph graph(tape, model, false);
  std::vector<double> scores;
  scores.reserve(candidates.size());
  for (const Candidate& c : candidates) {
    scores.push_back(tape.scalar_value(graph.pair_similarity(c.embedding, study)));
  }
  return scores;
}

std::vector<std::size_t> top_k(std::span<const double> scores, std::span<const std::uint32_t> group_ids,
                               std::size_t k) {
  if (scores.size() != group_ids.size()) throw ShapeError("top_k: scores and ids differ in length");
  if (scores.empty() || k == 0 || k > scores.size()) {
    throw UsageError("top_k: need 1 <= k <= pool size (k=" + std::to_string(k) +
                     ", pool=" + std::to_string(scores.size()) + ")");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return group_ids[a] < group_ids[b];
  });
  order.resize(k);
  return order;
}

RetrievalResult retrieve(const CvseModel& model, const Study& study, std::span<const Candidate> candidates,
                         std::size_t k, bool with_attention) {
  if (candidates.empty()) throw UsageError("retrieve: empty candidate pool");
  if (k == 0) throw UsageError("retrieve: k must be at least 1");
  const std::vector<double> scores = score_candidates(model, study, candidates);
  std::vector<std::uint32_t> ids;
  ids.reserve(candidates.size());
  for (const Candidate& c : candidates) ids.push_back(c.group_id);

  RetrievalResult result;
  for (std::size_t idx : top_k(scores, ids, k)) {
    RetrievedItem item;
    item.group_id = candidates[idx].group_id;
    item.sentence_id = candidates[idx].sentence_id;
    item.score = scores[idx];
    if (with_attention) {
      item.frontal_attention = model.attention_map(study.frontal, candidates[idx].embedding);
      item.lateral_attention = model.attention_map(study.lateral, candidates[idx].embedding);
    }
    result.items.push_back(std::move(item));
  }
  return result;
}

}  // namespace cvse::model
