#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cvse/model/cvse_model.hpp"
#include "cvse/model/retrieval.hpp"

namespace cvse::model {

struct TrainingData {
  std::vector<Study> train;
  std::vector<Study> dev;
  std::vector<Candidate> candidates;  // retrieval pool for dev recall
};

struct TrainConfig {
  std::size_t epochs = 40;
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t recall_k = 3;
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double mean_loss = 0.0;
  double dev_recall = 0.0;
  bool negatives_with_replacement = false;
};

struct TrainResult {
  CvseModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;  // 0 when no epoch ran
  double best_dev_recall = 0.0;
};

/// Recall@k of `model` over studies that have gold findings; k is capped at
/// the pool size. Returns 0 when no study has gold findings.
double dev_recall(const CvseModel& model, std::span<const Study> studies, std::span<const Candidate> candidates,
                  std::size_t k);

/// Mini-batch Adam on the triplet loss. Anchors are reshuffled and negatives
/// resampled every epoch; after each epoch dev recall@k is measured and the
/// parameters of the best epoch (earliest on ties) are returned. Without any
/// dev gold, the final epoch is returned. Deterministic for a given seed.
TrainResult train(const CvseModel& init, const TrainingData& data, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch = {});

}  // namespace cvse::model
