#include "cvse/model/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cvse/errors.hpp"
#include "cvse/eval/recall.hpp"
#include "cvse/model/loss.hpp"
#include "cvse/num/adam.hpp"
#include "cvse/num/random.hpp"

namespace cvse::model {

double dev_recall(const CvseModel& model, std::span<const Study> studies, std::span<const Candidate> candidates,
                  std::size_t k) {
  if (candidates.empty()) return 0.0;
  k = std::min(k, candidates.size());
  std::vector<std::vector<std::uint32_t>> retrieved, gold;
  for (const Study& s : studies) {
    if (s.findings.empty()) continue;
    std::vector<std::uint32_t> got;
    for (const RetrievedItem& item : retrieve(model, s, candidates, k, false).items) got.push_back(item.group_id);
    std::vector<std::uint32_t> truth;
    for (const Finding& f : s.findings) truth.push_back(f.group_id);
    retrieved.push_back(std::move(got));
    gold.push_back(std::move(truth));
  }
  if (gold.empty()) return 0.0;
  return eval::recall_at_k(retrieved, gold, k);
}

TrainResult train(const CvseModel& init, const TrainingData& data, const TrainConfig& config,
                  const std::function<void(const EpochLog&)>& on_epoch) {
  if (data.train.empty()) throw UsageError("train: empty training set");
  if (config.batch_size == 0) throw UsageError("train: batch size must be at least 1");
  for (const Study& s : data.train) {
    if (s.findings.empty()) throw UsageError("train: study '" + s.id + "' has no gold findings");
  }

  TrainResult result{init, {}, 0, 0.0};
  if (config.epochs == 0) return result;

  const bool has_dev = std::any_of(data.dev.begin(), data.dev.end(), [](const Study& s) {
    return !s.findings.empty();
  }) && !data.candidates.empty();

  CvseModel model = init;
  NegativeSampler sampler(data.train, model.hyper().negatives);
  num::Rng rng(num::derive_seed(config.seed, 0x7472));
  num::AdamState adam = num::AdamState::for_parameters(model.parameters(), config.learning_rate);
  double best = -1.0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<FindingRef> anchors = sampler.anchors();
    rng.shuffle(anchors);
    sampler.reset_fallback_flag();

    double loss_sum = 0.0;
    for (std::size_t start = 0, batch_id = 0; start < anchors.size(); start += config.batch_size, ++batch_id) {
      const std::size_t end = std::min(anchors.size(), start + config.batch_size);
      std::vector<TripletItem> batch;
      batch.reserve(end - start);
      for (std::size_t i = start; i < end; ++i) batch.push_back(sampler.sample(anchors[i], rng));

      std::vector<num::Matrix> grads;
      try {
        num::Tape tape;
        CvseGraph graph(tape, model, true);
        num::Var loss = triplet_loss(graph, data.train, batch, model.hyper().margin);
        const double value = tape.scalar_value(loss);
        if (!std::isfinite(value)) throw NumericError("loss is not finite");
        loss_sum += value * static_cast<double>(batch.size());
        tape.backward(loss);
        for (num::Var p : graph.params()) grads.push_back(tape.grad_matrix(p));
      } catch (const NumericError& e) {
        throw NumericError("epoch " + std::to_string(epoch) + " batch " + std::to_string(batch_id) + ": " + e.what());
      }
      adam = num::adam_step(model.parameters(), grads, adam);
    }

    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / static_cast<double>(anchors.size());
    entry.dev_recall = has_dev ? dev_recall(model, data.dev, data.candidates, config.recall_k) : 0.0;
    entry.negatives_with_replacement = sampler.fell_back();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);

    if (!has_dev || entry.dev_recall > best) {
      best = entry.dev_recall;
      result.model = model;
      result.best_epoch = epoch;
      result.best_dev_recall = entry.dev_recall;
    }
  }
  return result;
}

}  // namespace cvse::model
