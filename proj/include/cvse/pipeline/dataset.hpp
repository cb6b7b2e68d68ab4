#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "cvse/errors.hpp"
#include "cvse/model/feature_map.hpp"
#include "cvse/text/sentence.hpp"

namespace cvse::pipeline {

/// Manifest validation failure; the message names the offending record.
class IngestError : public DataError {
 public:
  using DataError::DataError;
};

enum class Split { kTrain = 0, kDev = 1, kTest = 2 };
Split parse_split(const std::string& name);
const char* split_name(Split split);

struct StudyRecord {
  std::string study_id;
  Split split = Split::kTrain;
  std::string report;
  /// Report positions of annotated abnormal sentences; empty optional when unannotated.
  std::optional<std::vector<std::size_t>> abnormal;
  model::FeatureMap frontal;
  model::FeatureMap lateral;
  std::vector<text::Sentence> sentences;  // report split, global sentence ids
};

struct Dataset {
  std::filesystem::path root;
  std::vector<StudyRecord> studies;  // manifest order
  std::array<std::size_t, 3> split_counts{};
  std::size_t sentence_count = 0;
  std::size_t width = 0, height = 0, channels = 0;

  const StudyRecord& study(const std::string& id) const;  // LookupError when unknown
  const text::Sentence& sentence(std::uint64_t id) const;  // LookupError when unknown
};

/// Reads a JSON-lines manifest. Each line is an object
///   {"study_id", "split", "report" | "report_path", "abnormal"?, "frontal", "lateral"}
/// with paths relative to the manifest's directory. Sentence ids run
/// consecutively over studies in manifest order. All feature maps must share
/// w, h and channel count; `expected_channels` (when nonzero) must match too.
Dataset ingest(const std::filesystem::path& manifest, std::size_t expected_channels = 0);

}  // namespace cvse::pipeline
