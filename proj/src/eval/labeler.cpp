#include "cvse/eval/labeler.hpp"

#include <algorithm>
#include <nlohmann/json.hpp>

#include "cvse/errors.hpp"
#include "cvse/pipeline/binary_io.hpp"
#include "cvse/text/sentence.hpp"

namespace cvse::eval {

const std::array<std::string_view, kDiseaseCount>& disease_names() {
  static const std::array<std::string_view, kDiseaseCount> names{
      "No Finding",   "Enlarged Cardiomediastinum", "Cardiomegaly",     "Lung Lesion", "Lung Opacity",
      "Edema",        "Consolidation",              "Pneumonia",        "Atelectasis", "Pneumothorax",
      "Pleural Effusion", "Pleural Other",          "Fracture",         "Support Devices"};
  return names;
}

namespace {

const char* kBuiltinKeywords = R"({
  "Enlarged Cardiomediastinum": ["enlarged cardiomediastinum", "prominent cardiomediastinal silhouette",
                                 "widened mediastinum", "mediastinal widening"],
  "Cardiomegaly": ["cardiomegaly", "enlarged heart", "heart is enlarged", "cardiac enlargement",
                   "heart size is enlarged"],
  "Lung Lesion": ["nodule", "nodules", "mass", "lesion", "lesions"],
  "Lung Opacity": ["opacity", "opacities", "opacification", "haziness"],
  "Edema": ["edema", "vascular congestion", "pulmonary congestion"],
  "Consolidation": ["consolidation", "consolidations"],
  "Pneumonia": ["pneumonia", "infection"],
  "Atelectasis": ["atelectasis", "atelectatic", "volume loss", "collapse"],
  "Pneumothorax": ["pneumothorax", "pneumothoraces"],
  "Pleural Effusion": ["pleural effusion", "pleural effusions", "effusion", "effusions"],
  "Pleural Other": ["pleural thickening", "pleural scarring", "fibrothorax"],
  "Fracture": ["fracture", "fractures"],
  "Support Devices": ["endotracheal tube", "tube", "catheter", "pacemaker", "wires", "picc line", "central line"]
})";

std::size_t disease_index(std::string_view name) {
  const auto& names = disease_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw DataError("keyword table: unknown disease '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - names.begin());
}

bool run_at(const std::vector<std::string>& tokens, std::size_t pos, const std::vector<std::string>& phrase) {
  if (pos + phrase.size() > tokens.size()) return false;
  return std::equal(phrase.begin(), phrase.end(), tokens.begin() + static_cast<std::ptrdiff_t>(pos));
}

const std::vector<std::vector<std::string>>& negation_cues() {
  static const std::vector<std::vector<std::string>> cues{{"no"}, {"without"}, {"negative", "for"}};
  return cues;
}

bool negated_at(const std::vector<std::string>& tokens, std::size_t match_start) {
  const std::size_t from = match_start >= 3 ? match_start - 3 : 0;
  for (std::size_t s = from; s < match_start; ++s) {
    for (const auto& cue : negation_cues()) {
      if (s + cue.size() <= match_start && run_at(tokens, s, cue)) return true;
    }
  }
  return false;
}

bool has_negation(const std::vector<std::string>& tokens) {
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    for (const auto& cue : negation_cues()) {
      if (run_at(tokens, s, cue)) return true;
    }
  }
  return false;
}

}  // namespace

KeywordTable KeywordTable::from_json(std::string_view json) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("keyword table: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("keyword table: expected a JSON object");
  KeywordTable table;
  for (const auto& [name, phrases] : doc.items()) {
    const std::size_t idx = disease_index(name);
    if (!phrases.is_array()) throw DataError("keyword table: '" + name + "' must map to a list");
    for (const auto& p : phrases) {
      if (!p.is_string()) throw DataError("keyword table: '" + name + "' has a non-string phrase");
      table.add(idx, p.get<std::string>());
    }
  }
  return table;
}

KeywordTable KeywordTable::load(const std::filesystem::path& path) { return from_json(io::read_text(path)); }

const KeywordTable& KeywordTable::builtin() {
  static const KeywordTable table = from_json(kBuiltinKeywords);
  return table;
}

void KeywordTable::add(std::size_t disease, std::string_view phrase) {
  if (disease >= kDiseaseCount) throw UsageError("keyword table: disease index out of range");
  auto tokens = text::tokenize(phrase);
  if (tokens.empty()) throw DataError("keyword table: empty trigger phrase");
  triggers_[disease].push_back(std::move(tokens));
}

bool KeywordTable::empty() const {
  return std::all_of(triggers_.begin(), triggers_.end(), [](const auto& t) { return t.empty(); });
}

std::string KeywordTable::to_json() const {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  for (std::size_t d = 0; d < kDiseaseCount; ++d) {
    if (triggers_[d].empty()) continue;
    auto& list = doc[std::string(disease_names()[d])] = nlohmann::ordered_json::array();
    for (const auto& phrase : triggers_[d]) {
      std::string joined;
      for (const auto& t : phrase) joined += (joined.empty() ? "" : " ") + t;
      list.push_back(joined);
    }
  }
  return doc.dump(2);
}

DiseaseLabels label_diseases(std::span<const std::string> sentences, const KeywordTable& table) {
  if (table.empty()) throw UsageError("label_diseases: empty keyword table");
  DiseaseLabels labels;
  bool all_negated = true;
  for (const std::string& sentence : sentences) {
    const auto tokens = text::tokenize(sentence);
    all_negated = all_negated && has_negation(tokens);
    for (std::size_t d = 1; d < kDiseaseCount; ++d) {
      if (labels.positive.test(d)) continue;
      for (const auto& phrase : table.triggers(d)) {
        bool hit = false;
        for (std::size_t pos = 0; pos < tokens.size() && !hit; ++pos) {
          hit = run_at(tokens, pos, phrase) && !negated_at(tokens, pos);
        }
        if (hit) {
          labels.positive.set(d);
          break;
        }
      }
    }
  }
  const bool any_disease = (labels.positive.to_ulong() >> 1) != 0;
  if (!any_disease && all_negated) labels.positive.set(kNoFinding);
  return labels;
}

}  // namespace cvse::eval
