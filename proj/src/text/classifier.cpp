#include "cvse/text/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cvse/errors.hpp"
#include "cvse/num/random.hpp"

namespace cvse::text {

namespace {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// Sparse (index, count) features in index order.
std::vector<std::pair<std::size_t, double>> featurize(const std::map<std::string, std::size_t>& vocab,
                                                      std::span<const std::string> tokens) {
  std::map<std::size_t, double> counts;
  for (const std::string& t : tokens) {
    if (auto it = vocab.find(t); it != vocab.end()) counts[it->second] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

}  // namespace

BowClassifier::BowClassifier(std::map<std::string, std::size_t> vocabulary, std::vector<double> weights, double bias,
                             double threshold)
    : vocabulary_(std::move(vocabulary)), weights_(std::move(weights)), bias_(bias) {
  if (weights_.size() != vocabulary_.size()) throw ShapeError("classifier weights do not match vocabulary size");
  set_threshold(threshold);
}

void BowClassifier::set_threshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw UsageError("classifier threshold must lie in (0, 1]");
  threshold_ = threshold;
}

BowClassifier BowClassifier::train(std::span<const LabeledText> data, const ClassifierConfig& config) {
  const bool has_pos = std::any_of(data.begin(), data.end(), [](const LabeledText& x) { return x.abnormal; });
  const bool has_neg = std::any_of(data.begin(), data.end(), [](const LabeledText& x) { return !x.abnormal; });
  if (!has_pos || !has_neg) throw UsageError("classifier training data must contain both classes");

  std::map<std::string, std::size_t> vocab;
  std::vector<std::vector<std::string>> tokenized;
  tokenized.reserve(data.size());
  for (const LabeledText& x : data) {
    tokenized.push_back(tokenize(x.text));
    for (const std::string& t : tokenized.back()) vocab.emplace(t, vocab.size());
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> features;
  features.reserve(data.size());
  for (const auto& toks : tokenized) features.push_back(featurize(vocab, toks));

  std::vector<double> w(vocab.size(), 0.0);
  double b = 0.0;
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(config.seed);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t i : order) {
      double z = b;
      for (const auto& [idx, c] : features[i]) z += w[idx] * c;
      const double err = sigmoid(z) - (data[i].abnormal ? 1.0 : 0.0);
      for (const auto& [idx, c] : features[i]) {
        w[idx] -= config.learning_rate * (err * c + config.l2 * w[idx]);
      }
      b -= config.learning_rate * err;
    }
  }
  return BowClassifier(std::move(vocab), std::move(w), b, config.threshold);
}

Classification BowClassifier::classify(std::span<const std::string> tokens) const {
  double z = bias_;
  for (const auto& [idx, c] : featurize(vocabulary_, tokens)) z += weights_[idx] * c;
  const double p = sigmoid(z);
  // sigmoid saturates to exactly 1.0, so threshold 1.0 must be special-cased to mean "never".
  return {threshold_ < 1.0 && p >= threshold_, p};
}

Classification BowClassifier::classify(std::string_view text) const { return classify(tokenize(text)); }

BinaryScores score_classifier(const BowClassifier& classifier, std::span<const LabeledText> data) {
  double tp = 0, fp = 0, fn = 0;
  for (const LabeledText& x : data) {
    const bool pred = classifier.classify(std::string_view(x.text)).abnormal;
    if (pred && x.abnormal) tp += 1;
    if (pred && !x.abnormal) fp += 1;
    if (!pred && x.abnormal) fn += 1;
  }
  BinaryScores s;
  s.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
  s.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0 ? 2 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

}  // namespace cvse::text
