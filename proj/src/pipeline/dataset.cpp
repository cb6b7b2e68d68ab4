#include "cvse/pipeline/dataset.hpp"

#include <set>
#include <sstream>

#include "cvse/pipeline/binary_io.hpp"
#include "cvse/pipeline/feature_io.hpp"
#include "json.hpp"

namespace cvse::pipeline {

using nlohmann::json;

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "dev") return Split::kDev;
  if (name == "test") return Split::kTest;
  throw UsageError("unknown split '" + name + "' (expected train, dev or test)");
}

const char* split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kTest: return "test";
  }
  return "?";
}

const StudyRecord& Dataset::study(const std::string& id) const {
  for (const auto& s : studies) {
    if (s.study_id == id) return s;
  }
  throw LookupError("unknown study '" + id + "'");
}

const text::Sentence& Dataset::sentence(std::uint64_t id) const {
  for (const auto& s : studies) {
    if (!s.sentences.empty() && id >= s.sentences.front().id && id <= s.sentences.back().id) {
      return s.sentences[id - s.sentences.front().id];
    }
  }
  throw LookupError("unknown sentence id " + std::to_string(id));
}

namespace {

std::string field_string(const json& rec, const char* key, const std::string& where) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) throw IngestError(where + ": missing string field '" + key + "'");
  return it->get<std::string>();
}

model::FeatureMap load_view(const std::filesystem::path& root, const json& rec, const char* key,
                            const std::string& where) {
  const auto path = root / field_string(rec, key, where);
  if (!std::filesystem::exists(path)) throw IngestError(where + ": " + key + " file not found: " + path.string());
  try {
    return read_feature_map(path);
  } catch (const DataError& e) {
    throw IngestError(where + ": " + key + ": " + e.what());
  }
}

}  // namespace

Dataset ingest(const std::filesystem::path& manifest, std::size_t expected_channels) {
  if (!std::filesystem::exists(manifest)) throw IngestError("manifest not found: " + manifest.string());
  Dataset data;
  data.root = manifest.parent_path();
  std::istringstream in(io::read_text(manifest));
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  std::uint64_t next_sentence = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string at_line = manifest.filename().string() + ":" + std::to_string(line_no);
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw IngestError(at_line + ": invalid JSON: " + e.what());
    }
    if (!rec.is_object()) throw IngestError(at_line + ": record is not an object");

    StudyRecord s;
    s.study_id = field_string(rec, "study_id", at_line);
    const std::string where = "study '" + s.study_id + "' (" + at_line + ")";
    if (!seen.insert(s.study_id).second) throw IngestError(where + ": duplicate study id");
    try {
      s.split = parse_split(field_string(rec, "split", where));
    } catch (const UsageError& e) {
      throw IngestError(where + ": " + e.what());
    }

    if (rec.contains("report")) {
      s.report = field_string(rec, "report", where);
    } else if (rec.contains("report_path")) {
      const auto path = data.root / field_string(rec, "report_path", where);
      if (!std::filesystem::exists(path)) throw IngestError(where + ": report file not found: " + path.string());
      s.report = io::read_text(path);
    } else {
      throw IngestError(where + ": needs 'report' or 'report_path'");
    }
    s.sentences = text::split_sentences(s.report, s.study_id, next_sentence);
    next_sentence += s.sentences.size();

    if (auto it = rec.find("abnormal"); it != rec.end() && !it->is_null()) {
      if (!it->is_array()) throw IngestError(where + ": 'abnormal' must be a list of sentence positions");
      std::vector<std::size_t> positions;
      for (const auto& p : *it) {
        if (!p.is_number_unsigned() || p.get<std::size_t>() >= s.sentences.size()) {
          throw IngestError(where + ": abnormal position " + p.dump() + " outside the report's " +
                            std::to_string(s.sentences.size()) + " sentences");
        }
        positions.push_back(p.get<std::size_t>());
      }
      s.abnormal = std::move(positions);
    }

    s.frontal = load_view(data.root, rec, "frontal", where);
    s.lateral = load_view(data.root, rec, "lateral", where);
    for (const auto* view : {&s.frontal, &s.lateral}) {
      const char* name = view == &s.frontal ? "frontal" : "lateral";
      if (expected_channels != 0 && view->channels() != expected_channels) {
        throw IngestError(where + ": " + name + " map has d2=" + std::to_string(view->channels()) +
                          " but the configuration says d2=" + std::to_string(expected_channels));
      }
      if (data.studies.empty() && view == &s.frontal) {
        data.width = view->width();
        data.height = view->height();
        data.channels = view->channels();
      } else if (view->width() != data.width || view->height() != data.height ||
                 view->channels() != data.channels) {
        std::ostringstream msg;
        msg << where << ": " << name << " map is " << view->width() << "x" << view->height() << "x"
            << view->channels() << ", expected " << data.width << "x" << data.height << "x" << data.channels;
        throw IngestError(msg.str());
      }
    }

    ++data.split_counts[static_cast<std::size_t>(s.split)];
    data.studies.push_back(std::move(s));
  }
  if (data.studies.empty()) throw IngestError("no studies in " + manifest.string());
  data.sentence_count = next_sentence;
  return data;
}

}  // namespace cvse::pipeline
