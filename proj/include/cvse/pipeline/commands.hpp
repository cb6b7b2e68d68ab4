#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "cvse/eval/labeler.hpp"
#include "cvse/model/cvse_model.hpp"
#include "cvse/model/retrieval.hpp"
#include "cvse/pipeline/config.hpp"
#include "cvse/pipeline/dataset.hpp"
#include "cvse/text/classifier.hpp"
#include "cvse/text/embedder.hpp"
#include "json.hpp"

namespace cvse::pipeline {

/// One line of the group file.
struct GroupRecord {
  std::uint32_t group_id = 0;
  std::size_t cluster_id = 0;
  std::string pattern;  // mutex flags as "0"/"1" characters
  std::vector<std::uint64_t> members;
  std::uint64_t representative_id = 0;
  std::string representative_text;
};

std::vector<GroupRecord> read_groups(const std::filesystem::path& path);

/// Sentence id -> group id over all group members.
std::unordered_map<std::uint64_t, std::uint32_t> group_index(const std::vector<GroupRecord>& groups);

/// Model studies for one split; findings are the study's grouped sentences.
std::vector<model::Study> build_studies(const Dataset& data, Split split, const std::vector<GroupRecord>& groups,
                                        const text::SentenceEmbedder& embedder);

/// One candidate per group: its representative sentence.
std::vector<model::Candidate> build_candidates(const Dataset& data, const std::vector<GroupRecord>& groups,
                                               const text::SentenceEmbedder& embedder);

struct ClusterSummary {
  std::size_t abnormal_sentences = 0;
  std::size_t clusters = 0;  // before refinement
  std::size_t groups = 0;    // after refinement
  std::optional<text::BinaryScores> classifier;  // set when the classifier ran
};

/// split -> classify -> embed -> K-Means -> mutex refinement -> representatives.
/// Writes the group file and the gold file (abnormal sentences and group ids per study).
ClusterSummary cmd_cluster(const RunConfig& config, std::ostream& log);

struct TrainSummary {
  std::size_t epochs = 0;
  std::size_t best_epoch = 0;
  double best_dev_recall = 0.0;
  std::vector<double> losses;
};

/// Trains on the train split with dev recall@k selection; writes the
/// checkpoint and `<out>/train_log.jsonl`.
TrainSummary cmd_train(const RunConfig& config, std::ostream& log);

/// Top-k retrieval for every study in `split`; writes the predictions file.
/// Returns the number of studies.
std::size_t cmd_retrieve(const RunConfig& config, Split split, std::ostream& log);

/// Scores the predictions file against the gold file; writes `<out>/metrics.json`.
nlohmann::ordered_json cmd_eval(const RunConfig& config, std::ostream& log);

/// Attention grids for one (study, sentence) pair, one CSV per view
/// (`h` rows of `w` values). Returns the frontal and lateral file paths.
std::pair<std::filesystem::path, std::filesystem::path> cmd_export_attention(const RunConfig& config,
                                                                             const std::string& study_id,
                                                                             std::uint64_t sentence_id,
                                                                             std::ostream& log);

/// Renders an h x w grid as CSV; every value keeps round-trip precision and a decimal point.
std::string attention_csv(const num::Matrix& grid);

/// Scores already-collected study texts; shared by cmd_eval and tests.
struct EvalInput {
  std::vector<std::string> study_ids;
  std::vector<std::vector<std::string>> predicted;  // sentences per study
  std::vector<std::vector<std::string>> gold;
  std::vector<std::vector<std::uint32_t>> predicted_groups;
  std::vector<std::vector<std::uint32_t>> gold_groups;
};
nlohmann::ordered_json evaluate_texts(const EvalInput& input, const eval::KeywordTable& keywords, std::size_t k);

}  // namespace cvse::pipeline
