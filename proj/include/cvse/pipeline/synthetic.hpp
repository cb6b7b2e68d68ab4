#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cvse/model/feature_map.hpp"
#include "cvse/num/tensor.hpp"
#include "cvse/pipeline/config.hpp"
#include "cvse/pipeline/dataset.hpp"

namespace cvse::pipeline {

struct SyntheticConfig {
  std::size_t concepts = 8;
  std::size_t train_studies = 200;
  std::size_t dev_studies = 50;
  std::size_t test_studies = 50;
  std::size_t width = 4;
  std::size_t height = 4;
  std::size_t d2 = 16;
  std::size_t d1 = 32;
  double noise = 0.1;
  /// Modifier variants per concept, 1-3. Variant v of a concept uses the v-th
  /// term of the concept's mutually exclusive term set (the third term of the
  /// two-term sets is "no modifier").
  std::size_t variants = 1;
  std::size_t block = 1;  // planted block side, in regions
  std::size_t max_findings = 3;
  std::uint64_t seed = 0;

  static SyntheticConfig from(const ConfigMap& map);
  /// Throws UsageError on an invalid combination.
  void validate() const;
};

struct PlantedBlock {
  std::size_t concept_id = 0;
  std::size_t x = 0, y = 0;  // top-left region
};

struct SyntheticStudy {
  std::string id;
  Split split = Split::kTrain;
  std::vector<std::string> sentences;   // report order
  std::vector<int> concept_ids;         // per sentence, -1 for normal sentences
  std::vector<std::size_t> variant_ids;  // per sentence, 0 for normal sentences
  std::vector<num::Vector> embeddings;  // per sentence, d1
  model::FeatureMap frontal, lateral;
  std::vector<PlantedBlock> frontal_blocks, lateral_blocks;

  std::string report() const;
  std::vector<std::size_t> abnormal_positions() const;
};

struct SyntheticCorpus {
  SyntheticConfig config;
  std::vector<num::Vector> visual_prototypes;  // per concept, d2, f32-exact
  std::vector<num::Vector> text_prototypes;    // per concept, d1
  std::vector<std::string> phrases;            // per concept
  std::vector<std::vector<std::string>> modifiers;  // per concept, one per variant
  std::vector<SyntheticStudy> studies;

  /// Distinct (concept, variant) pairs among all abnormal sentences.
  std::size_t expected_groups() const;
};

/// Deterministic for a given config: same seed, same corpus, bit for bit.
SyntheticCorpus make_synthetic(const SyntheticConfig& config);

/// Writes manifest.jsonl, features/*.cvfm, sentence_vectors.txt, truth.json
/// and run.cfg into `dir`. Only train studies carry abnormal annotations.
void write_synthetic(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace cvse::pipeline
