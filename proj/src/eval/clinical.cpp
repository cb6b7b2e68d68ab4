#include "cvse/eval/clinical.hpp"

#include <string>

#include "cvse/errors.hpp"

namespace cvse::eval {

ClinicalReport clinical_metrics(std::span<const DiseaseLabels> predicted, std::span<const DiseaseLabels> gold) {
  if (predicted.size() != gold.size()) {
    throw UsageError("clinical_metrics: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(gold.size()) + " gold label sets");
  }
  if (gold.empty()) throw UsageError("clinical_metrics: no studies");
  ClinicalReport report;
  const double n = static_cast<double>(gold.size());
  for (std::size_t d = 0; d < kDiseaseCount; ++d) {
    DiseaseMetrics& m = report.per_disease[d];
    for (std::size_t i = 0; i < gold.size(); ++i) {
      const bool p = predicted[i][d], g = gold[i][d];
      if (p && g) ++m.tp;
      if (p && !g) ++m.fp;
      if (!p && !g) ++m.tn;
      if (!p && g) ++m.fn;
    }
    m.accuracy = static_cast<double>(m.tp + m.tn) / n;
    m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
    m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
    report.macro_accuracy += m.accuracy;
    report.macro_precision += m.precision;
    report.macro_recall += m.recall;
  }
  report.macro_accuracy /= kDiseaseCount;
  report.macro_precision /= kDiseaseCount;
  report.macro_recall /= kDiseaseCount;
  return report;
}

}  // namespace cvse::eval
