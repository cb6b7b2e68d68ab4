#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "cvse/text/sentence.hpp"

namespace cvse::text {

struct LabeledText {
  std::string text;
  bool abnormal = false;
};

struct ClassifierConfig {
  std::size_t epochs = 50;
  double learning_rate = 0.5;
  double l2 = 1e-4;
  double threshold = 0.5;
  std::uint64_t seed = 0;
};

struct Classification {
  bool abnormal = false;
  double probability = 0.0;
};

/// Logistic regression over bag-of-words token counts.
class BowClassifier {
 public:
  BowClassifier(std::map<std::string, std::size_t> vocabulary, std::vector<double> weights, double bias,
                double threshold);

  /// SGD on the logistic loss with per-epoch shuffling. Throws UsageError
  /// unless both classes are present.
  static BowClassifier train(std::span<const LabeledText> data, const ClassifierConfig& config);

  /// probability = sigmoid(w . counts + b); tokens outside the vocabulary are ignored.
  Classification classify(std::span<const std::string> tokens) const;
  Classification classify(const Sentence& s) const { return classify(s.tokens); }
  Classification classify(std::string_view text) const;

  double threshold() const { return threshold_; }
  /// Threshold must lie in (0, 1].
  void set_threshold(double threshold);
  double bias() const { return bias_; }
  const std::map<std::string, std::size_t>& vocabulary() const { return vocabulary_; }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::map<std::string, std::size_t> vocabulary_;
  std::vector<double> weights_;
  double bias_ = 0.0;
  double threshold_ = 0.5;
};

struct BinaryScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision/recall/F1 of the abnormal class.
BinaryScores score_classifier(const BowClassifier& classifier, std::span<const LabeledText> data);

}  // namespace cvse::text
