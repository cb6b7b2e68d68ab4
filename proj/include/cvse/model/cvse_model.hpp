#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "cvse/model/feature_map.hpp"
#include "cvse/num/tape.hpp"
#include "cvse/num/tensor.hpp"

namespace cvse::model {

struct CvseDims {
  std::size_t text_dim = 0;       // d1
  std::size_t region_dim = 0;     // d2
  std::size_t joint_dim = 512;    // d
  std::size_t attention_dim = 0;  // d_att; 0 means "same as joint_dim"

  bool operator==(const CvseDims&) const = default;
};

struct CvseHyper {
  double margin = 0.2;
  std::size_t negatives = 8;
};

/// One abnormal finding attached to a study.
struct Finding {
  std::uint64_t sentence_id = 0;
  std::uint32_t group_id = 0;
  num::Vector embedding;
};

/// A two-view study and its gold findings.
struct Study {
  std::string id;
  FeatureMap frontal;
  FeatureMap lateral;
  std::vector<Finding> findings;
};

enum class Param : std::size_t {
  kTextWeight = 0,
  kTextBias,
  kRegionWeight,
  kRegionBias,
  kAttentionWeight,
  kAttentionBias,
  kAttentionVector,
};
inline constexpr std::size_t kParamCount = 7;

/// Projections into the joint space plus the region attention scorer.
///
/// Parameter order (also the checkpoint order):
///   text weight (d x d1), text bias (d), region weight (d x d2), region bias (d),
///   attention weight (d_att x 2d), attention bias (d_att), attention vector (d_att).
class CvseModel {
 public:
  CvseModel(CvseDims dims, CvseHyper hyper, std::array<num::Matrix, kParamCount> params);

  /// Uniform init in [-1/sqrt(fan_in), 1/sqrt(fan_in)] from `seed`.
  static CvseModel initialize(CvseDims dims, CvseHyper hyper, std::uint64_t seed);

  const CvseDims& dims() const { return dims_; }
  const CvseHyper& hyper() const { return hyper_; }
  void set_hyper(CvseHyper hyper);

  const num::Matrix& param(Param p) const { return params_[static_cast<std::size_t>(p)]; }
  num::Matrix& param(Param p) { return params_[static_cast<std::size_t>(p)]; }
  std::array<num::Matrix, kParamCount>& parameters() { return params_; }
  const std::array<num::Matrix, kParamCount>& parameters() const { return params_; }

  /// norm(linear(v)) in the joint space.
  num::Vector embed_text(const num::Vector& sentence) const;
  /// norm(linear(m_j)) for every region, as rows.
  num::Matrix embed_regions(const FeatureMap& map) const;
  /// Softmax attention over joint regions conditioned on the joint text vector.
  num::Vector attention(const num::Matrix& joint_regions, const num::Vector& joint_text) const;
  /// d(a, I) = -sum_j alpha_j ||m_j - v||^2.
  double similarity(const num::Vector& sentence, const FeatureMap& map) const;
  /// Mean of the frontal and lateral similarities.
  double pair_similarity(const num::Vector& sentence, const Study& study) const;
  /// Attention weights laid out as a height x width grid.
  num::Matrix attention_map(const FeatureMap& map, const num::Vector& sentence) const;

  bool operator==(const CvseModel& other) const { return dims_ == other.dims_ && params_ == other.params_; }

 private:
  CvseDims dims_;
  CvseHyper hyper_;
  std::array<num::Matrix, kParamCount> params_;
};

/// Records CVSE computations for one model on a tape, memoizing joint
/// embeddings per input object so a batch embeds each study once.
class CvseGraph {
 public:
  /// With `trainable` the parameters are recorded as gradient-carrying leaves.
  CvseGraph(num::Tape& tape, const CvseModel& model, bool trainable);
  /// Uses caller-recorded parameter leaves (checkpoint order); `model` supplies dimensions only.
  CvseGraph(num::Tape& tape, const CvseModel& model, std::span<const num::Var> params);

  num::Tape& tape() { return tape_; }
  std::span<const num::Var> params() const { return params_; }

  num::Var text(const num::Vector& sentence);
  num::Var regions(const FeatureMap& map);
  num::Var attention(num::Var joint_regions, num::Var joint_text);
  num::Var similarity(num::Var joint_regions, num::Var joint_text);
  num::Var pair_similarity(const num::Vector& sentence, const Study& study);

 private:
  num::Var region_scorer();

  num::Tape& tape_;
  const CvseModel& model_;
  std::array<num::Var, kParamCount> params_;
  num::Var region_scorer_;
  std::unordered_map<const void*, num::Var> text_cache_;
  std::unordered_map<const void*, num::Var> region_cache_;
};

}  // namespace cvse::model
