#include "cvse/model/loss.hpp"

#include <algorithm>

#include "cvse/errors.hpp"

namespace cvse::model {

namespace ad = num::ad;
using num::Var;

NegativeSampler::NegativeSampler(std::span<const Study> studies, std::size_t negatives)
    : studies_(studies), negatives_(negatives) {
  if (negatives_ == 0) throw UsageError("negatives must be at least 1");
  study_groups_.resize(studies.size());
  for (std::size_t s = 0; s < studies.size(); ++s) {
    auto& groups = study_groups_[s];
    for (std::size_t f = 0; f < studies[s].findings.size(); ++f) {
      anchors_.push_back({s, f});
      groups.push_back(studies[s].findings[f].group_id);
    }
    std::sort(groups.begin(), groups.end());
    groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  }
}

bool NegativeSampler::study_has_group(std::size_t study, std::uint32_t group) const {
  return std::binary_search(study_groups_[study].begin(), study_groups_[study].end(), group);
}

namespace {

// k draws from `eligible`, without replacement when possible.
template <typename T>
std::vector<T> draw(std::vector<T> eligible, std::size_t k, num::Rng& rng, bool& fell_back) {
  std::vector<T> out;
  if (eligible.empty()) {
    fell_back = true;
    return out;
  }
  out.reserve(k);
  if (eligible.size() >= k) {
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(eligible.size() - i));
      std::swap(eligible[i], eligible[j]);
      out.push_back(eligible[i]);
    }
  } else {
    fell_back = true;
    for (std::size_t i = 0; i < k; ++i) out.push_back(eligible[rng.below(eligible.size())]);
  }
  return out;
}

}  // namespace

TripletItem NegativeSampler::sample(FindingRef positive, num::Rng& rng) {
  if (positive.study >= studies_.size() || positive.finding >= studies_[positive.study].findings.size()) {
    throw UsageError("anchor outside the training pool");
  }
  const std::uint32_t group = studies_[positive.study].findings[positive.finding].group_id;

  std::vector<FindingRef> finding_pool;
  for (const FindingRef& ref : anchors_) {
    if (!study_has_group(positive.study, studies_[ref.study].findings[ref.finding].group_id)) {
      finding_pool.push_back(ref);
    }
  }
  std::vector<std::size_t> study_pool;
  for (std::size_t s = 0; s < studies_.size(); ++s) {
    if (!study_has_group(s, group)) study_pool.push_back(s);
  }

  TripletItem item;
  item.positive = positive;
  item.negative_findings = draw(std::move(finding_pool), negatives_, rng, fell_back_);
  item.negative_studies = draw(std::move(study_pool), negatives_, rng, fell_back_);
  return item;
}

Var triplet_loss(CvseGraph& graph, std::span<const Study> studies, std::span<const TripletItem> batch,
                 double margin) {
  if (batch.empty()) throw UsageError("triplet_loss on an empty batch");
  auto finding = [&](const FindingRef& ref) -> const Finding& {
    if (ref.study >= studies.size() || ref.finding >= studies[ref.study].findings.size()) {
      throw UsageError("finding reference outside the study list");
    }
    return studies[ref.study].findings[ref.finding];
  };

  std::vector<Var> terms;
  for (const TripletItem& item : batch) {
    const Study& anchor_study = studies[item.positive.study];
    const Finding& positive = finding(item.positive);
    Var pos = graph.pair_similarity(positive.embedding, anchor_study);
    for (const FindingRef& neg : item.negative_findings) {
      Var s = graph.pair_similarity(finding(neg).embedding, anchor_study);
      terms.push_back(ad::hinge(ad::add_constant(ad::sub(s, pos), margin)));
    }
    for (std::size_t neg_study : item.negative_studies) {
      if (neg_study >= studies.size()) throw UsageError("negative study outside the study list");
      Var s = graph.pair_similarity(positive.embedding, studies[neg_study]);
      terms.push_back(ad::hinge(ad::add_constant(ad::sub(s, pos), margin)));
    }
  }
  if (terms.empty()) terms.push_back(graph.tape().scalar(0.0));
  return ad::scale(ad::sum(terms), 1.0 / static_cast<double>(batch.size()));
}

double triplet_loss(const CvseModel& model, std::span<const Study> studies, std::span<const TripletItem> batch) {
  num::Tape tape(false);
  CvseGraph graph(tape, model, false);
  return tape.scalar_value(triplet_loss(graph, studies, batch, model.hyper().margin));
}

}  // namespace cvse::model
