#pragma once

#include <array>
#include <span>

#include "cvse/eval/labeler.hpp"

namespace cvse::eval {

struct DiseaseMetrics {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing was predicted positive
  double recall = 0.0;     // 0 when nothing is gold positive
};

struct ClinicalReport {
  std::array<DiseaseMetrics, kDiseaseCount> per_disease;
  double macro_accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
};

/// Per-disease confusion counts and their unweighted means over all 14
/// classes. Throws UsageError on empty or misaligned inputs.
ClinicalReport clinical_metrics(std::span<const DiseaseLabels> predicted, std::span<const DiseaseLabels> gold);

}  // namespace cvse::eval
